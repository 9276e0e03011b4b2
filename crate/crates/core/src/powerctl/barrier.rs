//! Dense log-barrier interior method for smooth concave maximization over a
//! polytope `{x : A x ≤ b}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) trait ConcaveObjective {
    fn value(&self, x: &DVector<f64>) -> f64;
    /// Gradient and Hessian of the objective at `x`.
    fn derivatives(&self, x: &DVector<f64>, grad: &mut DVector<f64>, hess: &mut DMatrix<f64>);
}

#[derive(Debug, Clone)]
pub(crate) struct Polytope {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl Polytope {
    pub fn slacks(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b - &self.a * x
    }

    pub fn strictly_contains(&self, x: &DVector<f64>) -> bool {
        self.slacks(x).iter().all(|&s| s > 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierSettings {
    /// Target bound `m/t` on the suboptimality of the returned point.
    pub gap_tol: f64,
    /// Newton steps allowed per centering pass.
    pub max_newton: usize,
    pub mu: f64,
    pub t0: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub x: DVector<f64>,
    pub newton_steps: usize,
    pub converged: bool,
}

/// Newton decrement targets `λ²/2` for the intermediate and final centering
/// passes.
const CENTERING_TOL: f64 = 1e-10;
const ROUGH_CENTERING_TOL: f64 = 1e-5;

fn barrier_value<O: ConcaveObjective>(obj: &O, poly: &Polytope, x: &DVector<f64>, t: f64) -> f64 {
    let s = poly.slacks(x);
    if s.iter().any(|&v| v <= 0.0) {
        return f64::INFINITY;
    }
    -t * obj.value(x) - s.iter().map(|v| v.ln()).sum::<f64>()
}

/// Maximizes `obj` over the interior of `poly`, starting from the strictly
/// feasible `x0`.
pub(crate) fn maximize<O: ConcaveObjective>(
    obj: &O,
    poly: &Polytope,
    x0: DVector<f64>,
    settings: &BarrierSettings,
) -> Result<BarrierOutcome> {
    if !poly.strictly_contains(&x0) {
        return Err(Error::Singular("barrier start point is not strictly feasible".into()));
    }
    let n = x0.len();
    let m = poly.b.len() as f64;
    let mut x = x0;
    let mut t = settings.t0;
    let mut steps = 0;
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    let mut converged = false;
    loop {
        let last = m / t <= settings.gap_tol;
        let tol = if last { CENTERING_TOL } else { ROUGH_CENTERING_TOL };
        for _ in 0..settings.max_newton {
            obj.derivatives(&x, &mut grad, &mut hess);
            let s = poly.slacks(&x);
            let inv: DVector<f64> = s.map(|v| 1.0 / v);
            let g = -t * &grad + poly.a.transpose() * &inv;
            let mut weighted = poly.a.clone();
            for (i, mut row) in weighted.row_iter_mut().enumerate() {
                row *= inv[i] * inv[i];
            }
            let h = poly.a.tr_mul(&weighted) - t * &hess;
            let dx = match h.clone().cholesky() {
                Some(ch) => -ch.solve(&g),
                None => {
                    let scale = h.diagonal().amax().max(1e-300);
                    let reg = h + DMatrix::identity(n, n) * (1e-12 * scale);
                    match reg.cholesky() {
                        Some(ch) => -ch.solve(&g),
                        None => return Err(Error::Singular("barrier Newton system".into())),
                    }
                }
            };
            let lambda_sq = -g.dot(&dx);
            steps += 1;
            if !(lambda_sq > 2.0 * tol) {
                break;
            }
            let phi = barrier_value(obj, poly, &x, t);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-16 {
                let cand = &x + alpha * &dx;
                let pc = barrier_value(obj, poly, &cand, t);
                if pc <= phi - 0.25 * alpha * lambda_sq {
                    x = cand;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if last {
            converged = true;
            break;
        }
        t *= settings.mu;
        if !t.is_finite() || t > 1e300 {
            break;
        }
    }
    Ok(BarrierOutcome {
        x,
        newton_steps: steps,
        converged,
    })
}

/// Linear objective `cᵀx`.
pub(crate) struct Linear(pub DVector<f64>);

impl ConcaveObjective for Linear {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.0.dot(x)
    }

    fn derivatives(&self, _x: &DVector<f64>, grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) {
        grad.copy_from(&self.0);
        hess.fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> BarrierSettings {
        BarrierSettings {
            gap_tol: 1e-10,
            max_newton: 200,
            mu: 20.0,
            t0: 1.0,
        }
    }

    fn unit_box(n: usize) -> Polytope {
        let mut a = DMatrix::zeros(2 * n, n);
        let mut b = DVector::zeros(2 * n);
        for i in 0..n {
            a[(i, i)] = -1.0;
            a[(n + i, i)] = 1.0;
            b[n + i] = 1.0;
        }
        Polytope { a, b }
    }

    struct Quadratic {
        center: DVector<f64>,
    }

    impl ConcaveObjective for Quadratic {
        fn value(&self, x: &DVector<f64>) -> f64 {
            -(x - &self.center).norm_squared()
        }
        fn derivatives(&self, x: &DVector<f64>, grad: &mut DVector<f64>, hess: &mut DMatrix<f64>) {
            grad.copy_from(&(-2.0 * (x - &self.center)));
            hess.fill_with_identity();
            *hess *= -2.0;
        }
    }

    #[test]
    fn linear_program_on_box() {
        let c = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let out = maximize(&Linear(c), &unit_box(3), DVector::from_element(3, 0.5), &settings()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-9 && out.x[1].abs() < 1e-9 && (out.x[2] - 1.0).abs() < 1e-9);
        assert!((Linear(DVector::from_vec(vec![1.0, -2.0, 0.5])).value(&out.x) - 1.5).abs() < 1e-9);
    }

    #[test]
    fn projection_onto_box() {
        let q = Quadratic {
            center: DVector::from_vec(vec![0.3, 1.7]),
        };
        let out = maximize(&q, &unit_box(2), DVector::from_element(2, 0.5), &settings()).unwrap();
        assert!((out.x[0] - 0.3).abs() < 1e-7);
        assert!((out.x[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn rejects_infeasible_start() {
        let c = DVector::from_vec(vec![1.0]);
        assert!(maximize(&Linear(c), &unit_box(1), DVector::from_element(1, 1.0), &settings()).is_err());
    }
}
