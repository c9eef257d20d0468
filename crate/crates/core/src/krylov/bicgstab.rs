use super::{add_scaled, sub_scaled, tiny, SolveReport, SolverConfig, Start, Workspace};
use crate::cnum::{cdiv, cmul, Cplx, ONE};
use crate::error::Result;
use crate::krylov::Preconditioner;
use crate::sparse::CsrMatrix;
use crate::vecops::{self, ZVector};

/// Right-preconditioned BiCGSTAB (van der Vorst).
///
/// One iteration is one full step with two operator applications. A
/// half-step exit (small `s`) still counts as an iteration. When the updated
/// residual drops below tolerance but the recomputed true residual does not,
/// the recurrence residual is replaced by the true one and iteration
/// continues.
pub fn solve_bicgstab(
    a: &CsrMatrix,
    b: &[Cplx],
    m: &Preconditioner,
    cfg: &SolverConfig,
) -> Result<(ZVector, SolveReport)> {
    let (mut ws, mut r) = match Workspace::start("bicgstab", a, b, m, cfg)? {
        Start::Done(x, report) => return Ok((x, report)),
        Start::Iterate(ws, r0) => (ws, r0),
    };
    let n = ws.n();
    let b_norm = ws.b_norm();
    let r_shadow = r.clone();
    let mut u = ZVector::zeros(n);
    let mut p = ZVector::zeros(n);
    let mut p_hat = ZVector::zeros(n);
    let mut v = ZVector::zeros(n);
    let mut s_hat = ZVector::zeros(n);
    let mut t = ZVector::zeros(n);

    let mut rho_old = ONE;
    let mut alpha = ONE;
    let mut omega = ONE;

    for it in 1..=ws.max_iterations {
        let done = it - 1;
        let rho = ws.dot(&r_shadow, &r);
        if tiny(rho) {
            return Err(ws.breakdown(&u, done, "rho", rho.abs()));
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            // p = r + beta * (p - omega * v)
            let beta = cmul(cdiv(rho, rho_old), cdiv(alpha, omega));
            sub_scaled(omega, &v, &mut p);
            vecops::zxpby(&r, beta, &mut p)?;
        }

        m.apply(&p, &mut p_hat)?;
        a.spmv_into(&p_hat, &mut v)?;
        let sigma = ws.dot(&r_shadow, &v);
        if tiny(sigma) {
            return Err(ws.breakdown(&u, done, "r_shadow . v", sigma.abs()));
        }
        alpha = cdiv(rho, sigma);

        // s = r - alpha * v, held in r
        sub_scaled(alpha, &v, &mut r);
        add_scaled(alpha, &p, &mut u);
        let s_rel = ws.norm(&r) / b_norm;
        if s_rel <= ws.tol {
            let true_rel = ws.true_residual(&u);
            if true_rel <= ws.tol {
                ws.history.push(true_rel);
                return Ok(ws.finish(&u, it));
            }
        }

        m.apply(&r, &mut s_hat)?;
        a.spmv_into(&s_hat, &mut t)?;
        let tt = ws.norm(&t);
        let tt = tt * tt;
        if !(tt >= super::BREAKDOWN_THRESHOLD) {
            return Err(ws.breakdown(&u, done, "t . t", tt));
        }
        omega = ws.dot(&t, &r) / tt;

        add_scaled(omega, &r, &mut u);
        sub_scaled(omega, &t, &mut r);

        let rel = ws.norm(&r) / b_norm;
        if !rel.is_finite() {
            ws.history.push(rel);
            return Err(ws.breakdown(&u, it, "residual", rel));
        }
        if rel <= ws.tol {
            let true_rel = ws.true_residual(&u);
            ws.history.push(true_rel);
            if true_rel <= ws.tol {
                return Ok(ws.finish(&u, it));
            }
            r.copy_from_slice(ws.last_true_residual());
        } else {
            ws.history.push(rel);
        }
        if tiny(omega) {
            return Err(ws.breakdown(&u, it, "omega", omega.abs()));
        }
        rho_old = rho;
    }
    let iterations = ws.max_iterations;
    Ok(ws.finish(&u, iterations))
}
