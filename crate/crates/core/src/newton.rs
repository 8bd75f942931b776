//! Damped Newton iteration for the small square systems behind the tangency
//! and ray solvers.

use crate::linalg::{solve, Matrix, Vector};

/// Maximum number of step halvings per iteration.
pub const MAX_HALVINGS: usize = 30;

pub(crate) struct Outcome {
    pub u: Vector,
    /// Max-norm of the final residual.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) struct Settings {
    /// Residual accepted as converged.
    pub accept: f64,
    /// Residual accepted when no damped step decreases it any further.
    pub stall_accept: f64,
    pub max_iter: usize,
}

/// Solves `F(u) = 0`. `residual` returns `None` outside the admissible set,
/// which the line search treats as a failed trial.
pub(crate) fn damped_newton<R, J>(u0: Vector, residual: R, jacobian: J, s: &Settings) -> Outcome
where
    R: Fn(&Vector) -> Option<Vector>,
    J: Fn(&Vector) -> Matrix,
{
    let mut u = u0;
    let Some(mut r) = residual(&u) else {
        return Outcome {
            u,
            residual: f64::INFINITY,
            iterations: 0,
            converged: false,
        };
    };
    let mut rn = r.amax();
    for k in 0..s.max_iter {
        if rn <= s.accept {
            return Outcome {
                u,
                residual: rn,
                iterations: k,
                converged: true,
            };
        }
        let Some(step) = solve(jacobian(&u), &(-&r)) else {
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = &u + &step * lambda;
            if let Some(rt) = residual(&trial) {
                let rtn = rt.amax();
                if rtn < rn {
                    u = trial;
                    r = rt;
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Outcome {
                converged: rn <= s.stall_accept,
                u,
                residual: rn,
                iterations: k + 1,
            };
        }
    }
    Outcome {
        converged: rn <= s.accept,
        u,
        residual: rn,
        iterations: s.max_iter,
    }
}
