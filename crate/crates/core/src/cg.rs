//! Preconditioned conjugate gradients on grid fields.

use crate::error::{Error, Result};
use crate::grid::RealField;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: RealField,
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn solve<A, P>(
    apply: A,
    precondition: P,
    rhs: &RealField,
    guess: Option<&RealField>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgOutcome>
where
    A: Fn(&RealField) -> Result<RealField>,
    P: Fn(&RealField) -> Result<RealField>,
{
    let b_norm = rhs.l2_norm();
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: RealField::zeros(rhs.grid(), rhs.dim()),
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut x = match guess {
        Some(g) => {
            rhs.ensure_compatible(g)?;
            g.clone()
        }
        None => RealField::zeros(rhs.grid(), rhs.dim()),
    };
    let mut r = match guess {
        Some(_) => RealField::lin_comb(1.0, rhs, -1.0, &apply(&x)?),
        None => rhs.clone(),
    };
    let mut res = r.l2_norm() / b_norm;
    if res <= rel_tol {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: res,
        });
    }
    let mut z = precondition(&r)?;
    let mut p = z.clone();
    let mut rz = r.l2_dot(&z);
    for it in 1..=max_iter {
        let ap = apply(&p)?;
        let pap = p.l2_dot(&ap);
        if !(pap > 0.0) {
            return Err(Error::Degenerate(format!(
                "operator is not positive definite (pAp = {pap:e})"
            )));
        }
        let step = rz / pap;
        x.axpy(step, &p);
        r.axpy(-step, &ap);
        res = r.l2_norm() / b_norm;
        if res <= rel_tol {
            return Ok(CgOutcome {
                solution: x,
                iterations: it,
                relative_residual: res,
            });
        }
        z = precondition(&r)?;
        let rz_next = r.l2_dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p = RealField::lin_comb(1.0, &z, beta, &p);
    }
    Err(Error::CgNotConverged {
        iterations: max_iter,
        residual: res,
    })
}
