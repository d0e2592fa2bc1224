//! Deterministic sample enumeration and the parallel max-violation scan.
//!
//! All checks share the same skeleton: enumerate a finite indexed family of
//! samples, evaluate a violation margin at each index, and keep the sample
//! with the largest margin, breaking ties toward the smallest index. Because
//! the winning sample is a unique maximum of the total order
//! `(margin desc, index asc)`, the parallel reduction returns the same
//! witness for every thread count and chunking, which keeps reports
//! byte-identical across runs.

use crate::error::{Error, Result};
use crate::expr::EvalError;
use crate::maps::VectorFn;
use crate::plan::SamplingPlan;
use crate::sets::SetSpec;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Largest number of grid points tolerated after taking the per-axis product.
const MAX_GRID_POINTS: usize = 200_000;
/// Rejection-sampling budget per requested random point.
const ATTEMPTS_PER_POINT: usize = 1_000;

/// The discretized quantifier domain of a pairwise check.
#[derive(Debug, Clone)]
pub(crate) struct SampleSpace {
    /// Distinct sampled points of the set (grid members, then random members).
    pub points: Vec<Vec<f64>>,
    /// Ordered index pairs `(s, t)` into `points`. Grid pairs come first in
    /// row-major order (diagonal included), then the random pairs.
    pub pairs: Vec<(u32, u32)>,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Anything noteworthy that happened while sampling.
    pub notes: Vec<String>,
}

impl SampleSpace {
    /// Enumerates grid members and seeded random member pairs of `set`.
    pub fn build(set: &SetSpec, plan: &SamplingPlan) -> Result<SampleSpace> {
        let grid = member_grid(set, plan.grid_per_axis)?;
        let mut notes = Vec::new();
        let mut points = grid;
        let n_grid = points.len();
        if n_grid == 0 {
            notes.push("no grid point satisfied the membership test".to_string());
        }
        let mut pairs = Vec::with_capacity(n_grid * n_grid + plan.random_pairs);
        for i in 0..n_grid {
            for j in 0..n_grid {
                pairs.push((i as u32, j as u32));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        let mut drawn = 0usize;
        for _ in 0..plan.random_pairs {
            let Some(s) = draw_member(set, &mut rng)? else {
                break;
            };
            let Some(t) = draw_member(set, &mut rng)? else {
                break;
            };
            let si = points.len() as u32;
            points.push(s);
            points.push(t);
            pairs.push((si, si + 1));
            drawn += 1;
        }
        if drawn < plan.random_pairs {
            notes.push(format!(
                "random sampling produced {} of {} requested pairs before the rejection budget ran out",
                drawn, plan.random_pairs
            ));
        }
        if points.len() > u32::MAX as usize {
            return Err(Error::InvalidPlan("sample space exceeds u32 point indexing".into()));
        }
        Ok(SampleSpace {
            points,
            pairs,
            alphas: plan.alpha_values.clone(),
            lambdas: plan.lambda_values.clone(),
            notes,
        })
    }

    /// Total number of `(pair, alpha, lambda)` samples.
    pub fn total(&self) -> u64 {
        self.pairs.len() as u64 * self.alphas.len() as u64 * self.lambdas.len() as u64
    }

    /// Maps a sample index back to its quadruple, inverse of the enumeration
    /// `index = (pair * |alphas| + a) * |lambdas| + l`.
    pub fn decode(&self, index: u64) -> (usize, usize, f64, f64) {
        let n_l = self.lambdas.len() as u64;
        let n_a = self.alphas.len() as u64;
        let l = (index % n_l) as usize;
        let a = ((index / n_l) % n_a) as usize;
        let pair = (index / (n_l * n_a)) as usize;
        let (si, ti) = self.pairs[pair];
        (si as usize, ti as usize, self.alphas[a], self.lambdas[l])
    }
}

/// The geometric data of one sampled combination: the shifted images
/// `a = alpha*s + E(s)` and `b = alpha*t + E(t)`, the kernel value
/// `psi_ab = Psi(a, b)` and the combination point `c = b + lambda * psi_ab`.
#[derive(Debug, Clone)]
pub(crate) struct PathPoint {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub psi_ab: Vec<f64>,
    pub c: Vec<f64>,
}

/// Evaluates the combination geometry for one sample. `es` and `et` are the
/// precomputed images `E(s)` and `E(t)`.
pub(crate) fn path_point(
    s: &[f64],
    t: &[f64],
    es: &[f64],
    et: &[f64],
    alpha: f64,
    lambda: f64,
    psi: &VectorFn,
) -> std::result::Result<PathPoint, EvalError> {
    let n = s.len();
    let a: Vec<f64> = (0..n).map(|i| alpha * s[i] + es[i]).collect();
    let b: Vec<f64> = (0..n).map(|i| alpha * t[i] + et[i]).collect();
    let mut args = Vec::with_capacity(2 * n);
    args.extend_from_slice(&a);
    args.extend_from_slice(&b);
    let psi_ab = psi.eval(&args)?;
    let c: Vec<f64> = (0..n).map(|i| b[i] + lambda * psi_ab[i]).collect();
    Ok(PathPoint { a, b, psi_ab, c })
}

/// Winning sample of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Best {
    pub margin: f64,
    pub index: u64,
}

fn merge(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if y.margin > x.margin || (y.margin == x.margin && y.index < x.index) {
            y
        } else {
            x
        }),
    }
}

/// Evaluates `eval` at every index in `0..total` in parallel and returns the
/// violation with the largest margin (smallest index on ties), or `None` when
/// no index reports a violation. `eval` returns `Ok(Some(margin))` for a
/// violated sample, `Ok(None)` for a satisfied one, and `Err` aborts the scan
/// (evaluation failures are errors, not refutations).
pub(crate) fn max_margin_scan<F>(total: u64, eval: F) -> Result<Option<Best>>
where
    F: Fn(u64) -> Result<Option<f64>> + Sync,
{
    (0..total)
        .into_par_iter()
        .try_fold(
            || None,
            |acc, index| -> Result<Option<Best>> {
                Ok(merge(acc, eval(index)?.map(|margin| Best { margin, index })))
            },
        )
        .try_reduce(|| None, |a, b| Ok(merge(a, b)))
}

/// Member points of the per-axis grid, in row-major axis order.
pub(crate) fn member_grid(set: &SetSpec, grid_per_axis: usize) -> Result<Vec<Vec<f64>>> {
    let dim = set.dim();
    let axes: Vec<Vec<f64>> = (0..dim).map(|i| set.bounds().linspace(i, grid_per_axis)).collect();
    let total: usize = axes.iter().map(Vec::len).try_fold(1usize, |acc, n| {
        let next = acc.checked_mul(n)?;
        (next <= MAX_GRID_POINTS).then_some(next)
    })
    .ok_or_else(|| {
        Error::InvalidPlan(format!(
            "grid of {} points per axis in dimension {} exceeds the {} point budget",
            grid_per_axis, dim, MAX_GRID_POINTS
        ))
    })?;

    let mut members = Vec::new();
    let mut point = vec![0.0; dim];
    for flat in 0..total {
        let mut rest = flat;
        for axis in (0..dim).rev() {
            let n = axes[axis].len();
            point[axis] = axes[axis][rest % n];
            rest /= n;
        }
        if set.is_member(&point)? {
            members.push(point.clone());
        }
    }
    Ok(members)
}

fn draw_member(set: &SetSpec, rng: &mut ChaCha8Rng) -> Result<Option<Vec<f64>>> {
    let bounds = set.bounds();
    if bounds.is_empty() {
        return Ok(None);
    }
    for _ in 0..ATTEMPTS_PER_POINT {
        let p: Vec<f64> = (0..set.dim())
            .map(|i| {
                let [lo, hi] = bounds.axis(i);
                if lo == hi {
                    lo
                } else {
                    rng.gen_range(lo..=hi)
                }
            })
            .collect();
        if set.is_member(&p)? {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{BoxBounds, SetSpec};

    fn interval(lo: f64, hi: f64) -> SetSpec {
        SetSpec::window(BoxBounds::new(vec![[lo, hi]]).unwrap())
    }

    #[test]
    fn grid_pairs_enumerate_row_major_with_diagonal() {
        let plan = SamplingPlan::default().with_grid(3).with_random_pairs(0);
        let space = SampleSpace::build(&interval(0.0, 1.0), &plan).unwrap();
        assert_eq!(space.points, vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert_eq!(space.pairs.len(), 9);
        assert_eq!(space.pairs[0], (0, 0));
        assert_eq!(space.pairs[1], (0, 1));
        assert_eq!(space.pairs[8], (2, 2));
    }

    #[test]
    fn decode_inverts_the_enumeration() {
        let plan = SamplingPlan::default().with_grid(4).with_random_pairs(3);
        let space = SampleSpace::build(&interval(-1.0, 1.0), &plan).unwrap();
        let n_a = space.alphas.len() as u64;
        let n_l = space.lambdas.len() as u64;
        for index in [0, 1, n_l, n_l * n_a, space.total() - 1] {
            let (si, ti, alpha, lambda) = space.decode(index);
            let pair = index / (n_a * n_l);
            assert_eq!((si as u32, ti as u32), (space.pairs[pair as usize].0, space.pairs[pair as usize].1));
            assert!(space.alphas.contains(&alpha));
            assert!(space.lambdas.contains(&lambda));
        }
    }

    #[test]
    fn random_pairs_are_seed_deterministic() {
        let plan = SamplingPlan::default().with_grid(2).with_random_pairs(50);
        let a = SampleSpace::build(&interval(-2.0, 2.0), &plan).unwrap();
        let b = SampleSpace::build(&interval(-2.0, 2.0), &plan).unwrap();
        assert_eq!(a.points, b.points);
        let other = SampleSpace::build(&interval(-2.0, 2.0), &plan.clone().with_seed(7)).unwrap();
        assert_ne!(a.points, other.points);
    }

    #[test]
    fn scan_returns_max_margin_smallest_index() {
        // Margins: index 3 and 8 tie at 2.0; index 5 has 1.0.
        let best = max_margin_scan(10, |i| {
            Ok(match i {
                3 | 8 => Some(2.0),
                5 => Some(1.0),
                _ => None,
            })
        })
        .unwrap()
        .unwrap();
        assert_eq!(best.index, 3);
        assert_eq!(best.margin, 2.0);
        let none = max_margin_scan(10, |_| Ok(None)).unwrap();
        assert!(none.is_none());
    }

    #[test]
    fn scan_propagates_errors() {
        let err = max_margin_scan(10, |i| {
            if i == 7 {
                Err(crate::error::Error::InvalidPlan("boom".into()))
            } else {
                Ok(None)
            }
        });
        assert!(err.is_err());
    }

    #[test]
    fn empty_total_scans_to_none() {
        assert!(max_margin_scan(0, |_| Ok(Some(1.0))).unwrap().is_none());
    }
}
