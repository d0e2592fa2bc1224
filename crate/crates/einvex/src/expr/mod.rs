//! A small total expression language for real-valued functions.
//!
//! Functions handed to the certification routines are written as plain text:
//!
//! ```text
//! if s > 0 then 1 else -s
//! abs(s)
//! [3*s^2, 3*t^2]
//! ```
//!
//! The grammar is deliberately tiny:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | atom ('^' INT)?
//! atom   := NUMBER | IDENT | '(' expr ')' | 'abs(' expr ')'
//!         | 'min(' expr ',' expr ')' | 'max(' expr ',' expr ')'
//!         | 'if' cond 'then' expr 'else' expr
//! cond   := expr ('<'|'<='|'>'|'>='|'=='|'!=') expr
//! vector := '[' expr (',' expr)* ']'
//! ```
//!
//! There are no loops, no symbols beyond the declared variables, and every
//! `if` carries an `else`, so a parsed expression is total by construction:
//! exactly one branch fires for any input. Comparisons are exact floating
//! comparisons; piecewise guards like `a1 != b1` mean bitwise-real equality on
//! purpose, because the map definitions they encode are themselves stated with
//! exact case splits.
//!
//! Evaluation is pure: no hidden state, no randomness, and the same input
//! slice always produces bit-identical output, which the deterministic
//! reduction over sample sets relies on.

mod parse;

pub use parse::ParseError;

use std::fmt;

/// Comparison operator inside an `if` guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    fn eval(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
        }
    }

    fn token(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Num(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
    Abs(Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
    If {
        lhs: Box<Node>,
        op: Cmp,
        rhs: Box<Node>,
        then: Box<Node>,
        otherwise: Box<Node>,
    },
}

/// Evaluation failure. Carries the offending input so a failed sample can be
/// reported exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub message: String,
    pub inputs: Vec<f64>,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at inputs {:?}", self.message, self.inputs)
    }
}

impl std::error::Error for EvalError {}

/// Result of evaluating a parsed map: scalar for `R^n -> R`, vector for
/// `R^n -> R^m`.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// An immutable parsed expression over a fixed, ordered variable list.
///
/// `components.len() == 1` for scalar expressions; a bracketed source like
/// `[a, b]` yields one component per entry. `Expr` is `Send + Sync` and
/// evaluation never mutates it, so a single instance may be shared freely
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    components: Vec<Node>,
    vars: Vec<String>,
    source: String,
}

impl Expr {
    /// Parses `src` against the declared variable names. Any identifier not
    /// in `vars` is a parse error with a byte position.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
        parse::parse(src, vars)
    }

    /// Number of input variables the expression was declared over.
    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Number of output components (1 for scalar expressions).
    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    /// The declared variable names, in positional order.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// The original source text.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluates on `args` (one value per declared variable).
    pub fn eval(&self, args: &[f64]) -> Result<Value, EvalError> {
        self.check_arity(args)?;
        if self.components.len() == 1 {
            Ok(Value::Scalar(eval_node(&self.components[0], args)?))
        } else {
            let mut out = Vec::with_capacity(self.components.len());
            for c in &self.components {
                out.push(eval_node(c, args)?);
            }
            Ok(Value::Vector(out))
        }
    }

    /// Evaluates a scalar expression; errors if the expression is a vector.
    pub fn eval_scalar(&self, args: &[f64]) -> Result<f64, EvalError> {
        self.check_arity(args)?;
        if self.components.len() != 1 {
            return Err(EvalError {
                message: format!(
                    "expected a scalar expression, `{}` has {} components",
                    self.source,
                    self.components.len()
                ),
                inputs: args.to_vec(),
            });
        }
        eval_node(&self.components[0], args)
    }

    /// Evaluates into a vector regardless of component count.
    pub fn eval_vector(&self, args: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.check_arity(args)?;
        let mut out = Vec::with_capacity(self.components.len());
        for c in &self.components {
            out.push(eval_node(c, args)?);
        }
        Ok(out)
    }

    fn check_arity(&self, args: &[f64]) -> Result<(), EvalError> {
        if args.len() != self.vars.len() {
            return Err(EvalError {
                message: format!(
                    "arity mismatch: `{}` takes {} arguments, got {}",
                    self.source,
                    self.vars.len(),
                    args.len()
                ),
                inputs: args.to_vec(),
            });
        }
        Ok(())
    }

    pub(crate) fn from_parts(components: Vec<Node>, vars: Vec<String>, source: String) -> Expr {
        Expr {
            components,
            vars,
            source,
        }
    }
}

fn eval_node(node: &Node, env: &[f64]) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Num(v) => *v,
        Node::Var(i) => env[*i],
        Node::Add(a, b) => eval_node(a, env)? + eval_node(b, env)?,
        Node::Sub(a, b) => eval_node(a, env)? - eval_node(b, env)?,
        Node::Mul(a, b) => eval_node(a, env)? * eval_node(b, env)?,
        Node::Div(a, b) => {
            let d = eval_node(b, env)?;
            if d == 0.0 {
                return Err(EvalError {
                    message: "division by zero".into(),
                    inputs: env.to_vec(),
                });
            }
            eval_node(a, env)? / d
        }
        Node::Neg(a) => -eval_node(a, env)?,
        Node::Pow(a, k) => eval_node(a, env)?.powi(*k),
        Node::Abs(a) => eval_node(a, env)?.abs(),
        Node::Min(a, b) => eval_node(a, env)?.min(eval_node(b, env)?),
        Node::Max(a, b) => eval_node(a, env)?.max(eval_node(b, env)?),
        Node::If {
            lhs,
            op,
            rhs,
            then,
            otherwise,
        } => {
            if op.eval(eval_node(lhs, env)?, eval_node(rhs, env)?) {
                eval_node(then, env)?
            } else {
                eval_node(otherwise, env)?
            }
        }
    })
}

// Printing produces a fully parenthesized form that reparses to an expression
// with identical evaluation; the round-trip property test leans on this.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.len() == 1 {
            write_node(f, &self.components[0], &self.vars)
        } else {
            write!(f, "[")?;
            for (i, c) in self.components.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_node(f, c, &self.vars)?;
            }
            write!(f, "]")
        }
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, vars: &[String]) -> fmt::Result {
    match node {
        Node::Num(v) => {
            if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                // A bare negative literal only arises from folding; print it
                // in parseable (unary minus) form.
                write!(f, "(-{})", -v)
            } else {
                write!(f, "{}", v)
            }
        }
        Node::Var(i) => write!(f, "{}", vars[*i]),
        Node::Add(a, b) => binary(f, a, "+", b, vars),
        Node::Sub(a, b) => binary(f, a, "-", b, vars),
        Node::Mul(a, b) => binary(f, a, "*", b, vars),
        Node::Div(a, b) => binary(f, a, "/", b, vars),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(f, a, vars)?;
            write!(f, ")")
        }
        Node::Pow(a, k) => {
            write!(f, "(")?;
            write_node(f, a, vars)?;
            write!(f, "^{})", k)
        }
        Node::Abs(a) => {
            write!(f, "abs(")?;
            write_node(f, a, vars)?;
            write!(f, ")")
        }
        Node::Min(a, b) => {
            write!(f, "min(")?;
            write_node(f, a, vars)?;
            write!(f, ", ")?;
            write_node(f, b, vars)?;
            write!(f, ")")
        }
        Node::Max(a, b) => {
            write!(f, "max(")?;
            write_node(f, a, vars)?;
            write!(f, ", ")?;
            write_node(f, b, vars)?;
            write!(f, ")")
        }
        Node::If {
            lhs,
            op,
            rhs,
            then,
            otherwise,
        } => {
            write!(f, "(if ")?;
            write_node(f, lhs, vars)?;
            write!(f, " {} ", op.token())?;
            write_node(f, rhs, vars)?;
            write!(f, " then ")?;
            write_node(f, then, vars)?;
            write!(f, " else ")?;
            write_node(f, otherwise, vars)?;
            write!(f, ")")
        }
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    a: &Node,
    op: &str,
    b: &Node,
    vars: &[String],
) -> fmt::Result {
    write!(f, "(")?;
    write_node(f, a, vars)?;
    write!(f, " {} ", op)?;
    write_node(f, b, vars)?;
    write!(f, ")")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, s: f64) -> f64 {
        Expr::parse(src, &["s"])
            .unwrap()
            .eval_scalar(&[s])
            .unwrap()
    }

    #[test]
    fn piecewise_indicator_matches_case_split() {
        // h(s) = 1 for s > 0, -s otherwise.
        let h = "if s > 0 then 1 else -s";
        assert_eq!(eval1(h, 0.75), 1.0);
        assert_eq!(eval1(h, 0.0), 0.0);
        assert_eq!(eval1(h, -2.0), 2.0);
        assert_eq!(eval1(h, -6.0), 6.0);
    }

    #[test]
    fn absolute_value_map() {
        assert_eq!(eval1("abs(s)", -1.5), 1.5);
        assert_eq!(eval1("abs(s)", 2.0), 2.0);
        assert_eq!(eval1("abs(s)", 0.0), 0.0);
    }

    #[test]
    fn piecewise_kernel_map_uses_exact_inequality() {
        let psi = Expr::parse("if a1 != b1 then -b1 else 0", &["a1", "b1"]).unwrap();
        assert_eq!(psi.eval_scalar(&[0.0, 1.5]).unwrap(), -1.5);
        assert_eq!(psi.eval_scalar(&[1.5, 1.5]).unwrap(), 0.0);
        assert_eq!(psi.eval_scalar(&[-0.5, -0.5]).unwrap(), 0.0);
    }

    #[test]
    fn negated_square_binds_tighter_than_unary_minus() {
        // -s^2 must parse as -(s^2).
        assert_eq!(eval1("-s^2", -1.0), -1.0);
        assert_eq!(eval1("-s^2", 2.0), -4.0);
    }

    #[test]
    fn vector_expressions_evaluate_componentwise() {
        let g = Expr::parse("[3*s^2, 3*t^2]", &["s", "t"]).unwrap();
        assert_eq!(g.output_dim(), 2);
        assert_eq!(
            g.eval(&[-0.5, -0.25]).unwrap(),
            Value::Vector(vec![0.75, 0.1875])
        );
    }

    #[test]
    fn division_by_zero_reports_the_input() {
        let e = Expr::parse("1 / s", &["s"]).unwrap();
        let err = e.eval_scalar(&[0.0]).unwrap_err();
        assert!(err.message.contains("division by zero"));
        assert_eq!(err.inputs, vec![0.0]);
        assert_eq!(e.eval_scalar(&[2.0]).unwrap(), 0.5);
    }

    #[test]
    fn arity_is_enforced() {
        let e = Expr::parse("s + t", &["s", "t"]).unwrap();
        assert!(e.eval_scalar(&[1.0]).is_err());
    }

    #[test]
    fn integer_powers() {
        assert_eq!(eval1("s^3", -0.5), -0.125);
        assert_eq!(eval1("s^0", 3.0), 1.0);
        assert_eq!(eval1("2*s^2 - s + 1", 3.0), 16.0);
    }

    #[test]
    fn min_max_atoms() {
        assert_eq!(eval1("min(s, 1)", 2.0), 1.0);
        assert_eq!(eval1("max(s, 0) - min(s, 0)", -2.0), 2.0);
    }

    #[test]
    fn display_round_trips_exactly() {
        let srcs = [
            "if s > 0 then 1 else -s",
            "-s^2",
            "abs(s) * (s - 1) / (s + 4)",
            "min(max(s, 0), 1) + 2^3",
            "if s <= -1 then s^2 else if s == 0 then 0 else 1 - s",
        ];
        for src in srcs {
            let e = Expr::parse(src, &["s"]).unwrap();
            let printed = e.to_string();
            let back = Expr::parse(&printed, &["s"]).unwrap();
            for i in -40..=40 {
                let x = i as f64 * 0.17;
                assert_eq!(
                    e.eval_scalar(&[x]).unwrap().to_bits(),
                    back.eval_scalar(&[x]).unwrap().to_bits(),
                    "mismatch for `{}` reprinted as `{}` at {}",
                    src,
                    printed,
                    x
                );
            }
        }
    }
}
