use super::{add_scaled, sub_scaled, tiny, SolveReport, SolverConfig, Start, Workspace};
use crate::cnum::{cdiv, cmul, Cplx, ZERO};
use crate::error::Result;
use crate::krylov::Preconditioner;
use crate::sparse::CsrMatrix;
use crate::vecops::{self, ZVector};

/// Right-preconditioned TFQMR (Freund), in the two-half-step form of Saad's
/// Algorithm 7.8.
///
/// One iteration is a pair of half steps (odd and even). The true residual
/// `||b - A x||` is recomputed at the end of every iteration and drives the
/// convergence decision; the quasi-residual bound `sqrt(m + 1) * tau` only
/// triggers an early true-residual check after the first half step.
pub fn solve_tfqmr(
    a: &CsrMatrix,
    b: &[Cplx],
    m: &Preconditioner,
    cfg: &SolverConfig,
) -> Result<(ZVector, SolveReport)> {
    let (mut ws, r0) = match Workspace::start("tfqmr", a, b, m, cfg)? {
        Start::Done(x, report) => return Ok((x, report)),
        Start::Iterate(ws, r0) => (ws, r0),
    };
    let n = ws.n();
    let b_norm = ws.b_norm();

    let r_shadow = r0.clone();
    let mut w = r0.clone();
    let mut u = r0.clone(); // u_m at even m
    let mut u_next = ZVector::zeros(n); // u_{m+1}
    let mut v = ZVector::zeros(n);
    ws.op(&u, &mut v);
    let mut au = v.clone(); // A M^{-1} u_m
    let mut au_next = ZVector::zeros(n);
    let mut d = ZVector::zeros(n);
    let mut x = ZVector::zeros(n);

    let mut tau = ws.norm(&r0);
    let mut theta = 0.0f64;
    let mut eta = ZERO;
    let mut rho = ws.dot(&r_shadow, &r0);
    let mut half_steps = 0usize;

    if tiny(rho) {
        return Err(ws.breakdown(&x, 0, "rho", rho.abs()));
    }

    for it in 1..=ws.max_iterations {
        let done = it - 1;
        let sigma = ws.dot(&r_shadow, &v);
        if tiny(sigma) {
            return Err(ws.breakdown(&x, done, "r_shadow . v", sigma.abs()));
        }
        if !(tau >= super::BREAKDOWN_THRESHOLD) {
            return Err(ws.breakdown(&x, done, "tau", tau));
        }
        let alpha = cdiv(rho, sigma);

        // first half step, uses u_m
        u_next.copy_from_slice(&u);
        sub_scaled(alpha, &v, &mut u_next);
        sub_scaled(alpha, &au, &mut w);
        quasi_step(&ws, &u, alpha, &w, &mut d, &mut x, &mut theta, &mut tau, &mut eta);
        half_steps += 1;
        let bound = tau * ((half_steps + 1) as f64).sqrt() / b_norm;
        if bound <= ws.tol {
            let true_rel = ws.true_residual(&x);
            if true_rel <= ws.tol {
                ws.history.push(true_rel);
                return Ok(ws.finish(&x, it));
            }
        }
        if !(tau >= super::BREAKDOWN_THRESHOLD) {
            return Err(ws.breakdown(&x, done, "tau", tau));
        }

        // second half step, uses u_{m+1}
        ws.op(&u_next, &mut au_next);
        sub_scaled(alpha, &au_next, &mut w);
        quasi_step(&ws, &u_next, alpha, &w, &mut d, &mut x, &mut theta, &mut tau, &mut eta);
        half_steps += 1;

        let rel = ws.true_residual(&x);
        ws.history.push(rel);
        if !rel.is_finite() {
            return Err(ws.breakdown(&x, it, "residual", rel));
        }
        if rel <= ws.tol {
            return Ok(ws.finish(&x, it));
        }
        if it == ws.max_iterations {
            break;
        }

        let rho_next = ws.dot(&r_shadow, &w);
        if tiny(rho_next) {
            return Err(ws.breakdown(&x, it, "rho", rho_next.abs()));
        }
        let beta = cdiv(rho_next, rho);
        rho = rho_next;
        // u = w + beta * u_{m+1}
        u.copy_from_slice(&u_next);
        vecops::zxpby(&w, beta, &mut u)?;
        // v = A u + beta * (A u_{m+1} + beta * v)
        vecops::zxpby(&au_next, beta, &mut v)?;
        ws.op(&u, &mut au);
        vecops::zxpby(&au, beta, &mut v)?;
    }
    let iterations = ws.max_iterations;
    Ok(ws.finish(&x, iterations))
}

/// Quasi-minimisation half step: `d = u + (theta^2 / alpha) eta d`, then the
/// `theta`, `tau`, `eta` recurrences and `x += eta d`.
#[allow(clippy::too_many_arguments)]
fn quasi_step(
    ws: &Workspace,
    u: &[Cplx],
    alpha: Cplx,
    w: &[Cplx],
    d: &mut [Cplx],
    x: &mut [Cplx],
    theta: &mut f64,
    tau: &mut f64,
    eta: &mut Cplx,
) {
    let coef = cmul(cdiv(Cplx::real(*theta * *theta), alpha), *eta);
    vecops::zxpby(u, coef, d).expect("workspace vectors share one length");
    *theta = ws.norm(w) / *tau;
    let c2 = 1.0 / (1.0 + *theta * *theta);
    *tau *= *theta * c2.sqrt();
    *eta = alpha.scale(c2);
    add_scaled(*eta, d, x);
}
