//! Callable wrappers around expressions and composed functions.
//!
//! Checks and solvers work against [`ScalarFn`] (`R^n -> R`) and [`VectorFn`]
//! (`R^n -> R^m`) rather than raw [`Expr`] values, so that derived functions
//! (weighted sums, pointwise suprema, compositions, grid marginals, product
//! maps) plug into the same machinery as parsed expressions.

use crate::expr::{EvalError, Expr};
use std::fmt;
use std::sync::Arc;

type ScalarImpl = dyn Fn(&[f64]) -> Result<f64, EvalError> + Send + Sync;
type VectorImpl = dyn Fn(&[f64]) -> Result<Vec<f64>, EvalError> + Send + Sync;

/// A real-valued function of `arity` real arguments.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    arity: usize,
    f: Arc<ScalarImpl>,
}

impl ScalarFn {
    pub fn from_expr(expr: Expr) -> Result<ScalarFn, EvalError> {
        if expr.output_dim() != 1 {
            return Err(EvalError {
                message: format!(
                    "`{}` has {} components, expected a scalar",
                    expr.source(),
                    expr.output_dim()
                ),
                inputs: vec![],
            });
        }
        let name = expr.source().to_string();
        let arity = expr.arity();
        Ok(ScalarFn {
            name,
            arity,
            f: Arc::new(move |args| expr.eval_scalar(args)),
        })
    }

    pub fn from_fn<F>(name: impl Into<String>, arity: usize, f: F) -> ScalarFn
    where
        F: Fn(&[f64]) -> Result<f64, EvalError> + Send + Sync + 'static,
    {
        ScalarFn {
            name: name.into(),
            arity,
            f: Arc::new(f),
        }
    }

    pub fn constant(arity: usize, value: f64) -> ScalarFn {
        ScalarFn::from_fn(format!("{}", value), arity, move |_| Ok(value))
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        (self.f)(args)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({} -> 1, `{}`)", self.arity, self.name)
    }
}

/// A vector-valued function of `in_dim` real arguments.
#[derive(Clone)]
pub struct VectorFn {
    name: String,
    in_dim: usize,
    out_dim: usize,
    f: Arc<VectorImpl>,
}

impl VectorFn {
    /// Wraps an expression; a scalar expression becomes a one-component map,
    /// which is the common spelling for maps on `R`.
    pub fn from_expr(expr: Expr) -> VectorFn {
        let name = expr.source().to_string();
        let in_dim = expr.arity();
        let out_dim = expr.output_dim();
        VectorFn {
            name,
            in_dim,
            out_dim,
            f: Arc::new(move |args| expr.eval_vector(args)),
        }
    }

    pub fn from_fn<F>(name: impl Into<String>, in_dim: usize, out_dim: usize, f: F) -> VectorFn
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, EvalError> + Send + Sync + 'static,
    {
        VectorFn {
            name: name.into(),
            in_dim,
            out_dim,
            f: Arc::new(f),
        }
    }

    pub fn identity(dim: usize) -> VectorFn {
        VectorFn::from_fn("identity", dim, dim, |args| Ok(args.to_vec()))
    }

    pub fn eval(&self, args: &[f64]) -> Result<Vec<f64>, EvalError> {
        let out = (self.f)(args)?;
        if out.len() != self.out_dim {
            return Err(EvalError {
                message: format!(
                    "`{}` produced {} components, declared {}",
                    self.name,
                    out.len(),
                    self.out_dim
                ),
                inputs: args.to_vec(),
            });
        }
        Ok(out)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for VectorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "VectorFn({} -> {}, `{}`)",
            self.in_dim, self.out_dim, self.name
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_from_vector_expr_is_rejected() {
        let e = Expr::parse("[s, s]", &["s"]).unwrap();
        assert!(ScalarFn::from_expr(e).is_err());
    }

    #[test]
    fn vector_from_scalar_expr_has_one_component() {
        let e = Expr::parse("abs(s)", &["s"]).unwrap();
        let v = VectorFn::from_expr(e);
        assert_eq!(v.out_dim(), 1);
        assert_eq!(v.eval(&[-2.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn identity_map() {
        let id = VectorFn::identity(2);
        assert_eq!(id.eval(&[1.0, -3.0]).unwrap(), vec![1.0, -3.0]);
    }
}
