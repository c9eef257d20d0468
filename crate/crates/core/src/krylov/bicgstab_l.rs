use super::{add_scaled, sub_scaled, tiny, SolveReport, SolverConfig, Start, Workspace};
use crate::cnum::{cdiv, cmul, Cplx, ONE, ZERO};
use crate::error::Result;
use crate::krylov::Preconditioner;
use crate::sparse::CsrMatrix;
use crate::vecops::{self, ZVector};

/// Right-preconditioned BiCGSTAB(l) after Sleijpen and Fokkema.
///
/// Each outer cycle runs `l` BiCG steps, building `r_0..r_l` and `u_0..u_l`
/// with `r_{j+1} = A M^{-1} r_j`, then applies a degree-`l` minimal-residual
/// polynomial. The least-squares problem for the polynomial coefficients is
/// solved by modified Gram-Schmidt on `r_1..r_l`.
///
/// Iterations are counted in inner BiCG steps, so one cycle is `l`
/// iterations and `l = 1` counts like BiCGSTAB. The history gets one entry
/// per inner step; the entry closing a cycle is taken after the MR update.
pub fn solve_bicgstab_l(
    a: &CsrMatrix,
    b: &[Cplx],
    m: &Preconditioner,
    cfg: &SolverConfig,
) -> Result<(ZVector, SolveReport)> {
    let (mut ws, r0) = match Workspace::start("bicgstab_l", a, b, m, cfg)? {
        Start::Done(x, report) => return Ok((x, report)),
        Start::Iterate(ws, r0) => (ws, r0),
    };
    let l = cfg.l;
    let n = ws.n();
    let b_norm = ws.b_norm();

    let r_shadow = r0.clone();
    let mut r: Vec<ZVector> = std::iter::once(r0)
        .chain((0..l).map(|_| ZVector::zeros(n)))
        .collect();
    let mut u: Vec<ZVector> = (0..=l).map(|_| ZVector::zeros(n)).collect();
    let mut x = ZVector::zeros(n);

    // 1-based arrays for the MR part, index 0 unused
    let mut tau = vec![vec![ZERO; l + 1]; l + 1];
    let mut sigma = vec![0.0f64; l + 1];
    let mut g1 = vec![ZERO; l + 1];
    let mut g = vec![ZERO; l + 1];
    let mut g2 = vec![ZERO; l + 1];

    let mut rho0 = ONE;
    let mut alpha = ZERO;
    let mut omega = ONE;
    let mut done = 0usize;

    loop {
        rho0 = -cmul(omega, rho0);

        for j in 0..l {
            if tiny(rho0) {
                return Err(ws.breakdown(&x, done, "rho", rho0.abs()));
            }
            let rho1 = ws.dot(&r_shadow, &r[j]);
            let beta = cmul(alpha, cdiv(rho1, rho0));
            rho0 = rho1;
            for i in 0..=j {
                // u_i = r_i - beta * u_i
                vecops::zxpby(&r[i], -beta, &mut u[i])?;
            }
            {
                let (lo, hi) = u.split_at_mut(j + 1);
                ws.op(&lo[j], &mut hi[0]);
            }
            let gamma = ws.dot(&r_shadow, &u[j + 1]);
            if tiny(gamma) {
                return Err(ws.breakdown(&x, done, "r_shadow . u", gamma.abs()));
            }
            alpha = cdiv(rho0, gamma);
            for i in 0..=j {
                sub_scaled(alpha, &u[i + 1], &mut r[i]);
            }
            {
                let (lo, hi) = r.split_at_mut(j + 1);
                ws.op(&lo[j], &mut hi[0]);
            }
            add_scaled(alpha, &u[0], &mut x);
            done += 1;

            let rel = ws.norm(&r[0]) / b_norm;
            if !rel.is_finite() {
                ws.history.push(rel);
                return Err(ws.breakdown(&x, done, "residual", rel));
            }
            let mut entry = rel;
            if rel <= ws.tol {
                entry = ws.true_residual(&x);
                if entry <= ws.tol {
                    ws.history.push(entry);
                    return Ok(ws.finish(&x, done));
                }
            }
            // the closing step of a cycle is recorded after the MR update
            if j + 1 < l {
                ws.history.push(entry);
                if done == ws.max_iterations {
                    return Ok(ws.finish(&x, done));
                }
            }
        }

        // minimal-residual polynomial via modified Gram-Schmidt
        for j in 1..=l {
            for i in 1..j {
                tau[i][j] = ws.dot(&r[i], &r[j]) / sigma[i];
                let (lo, hi) = r.split_at_mut(j);
                sub_scaled(tau[i][j], &lo[i], &mut hi[0]);
            }
            let nrm = ws.norm(&r[j]);
            sigma[j] = nrm * nrm;
            if !(sigma[j] >= super::BREAKDOWN_THRESHOLD) {
                let rel = ws.norm(&r[0]) / b_norm;
                ws.history.push(rel);
                return Err(ws.breakdown(&x, done, "sigma", sigma[j]));
            }
            g1[j] = ws.dot(&r[j], &r[0]) / sigma[j];
        }
        g[l] = g1[l];
        omega = g[l];
        for j in (1..l).rev() {
            let mut acc = g1[j];
            for i in j + 1..=l {
                acc -= cmul(tau[j][i], g[i]);
            }
            g[j] = acc;
        }
        for j in 1..l {
            let mut acc = g[j + 1];
            for i in j + 1..l {
                acc += cmul(tau[j][i], g[i + 1]);
            }
            g2[j] = acc;
        }

        add_scaled(g[1], &r[0], &mut x);
        {
            let (lo, hi) = r.split_at_mut(1);
            sub_scaled(g1[l], &hi[l - 1], &mut lo[0]);
        }
        {
            let (lo, hi) = u.split_at_mut(1);
            sub_scaled(g[l], &hi[l - 1], &mut lo[0]);
        }
        for j in 1..l {
            {
                let (lo, hi) = u.split_at_mut(j);
                sub_scaled(g[j], &hi[0], &mut lo[0]);
            }
            add_scaled(g2[j], &r[j], &mut x);
            {
                let (lo, hi) = r.split_at_mut(j);
                sub_scaled(g1[j], &hi[0], &mut lo[0]);
            }
        }

        let rel = ws.norm(&r[0]) / b_norm;
        if !rel.is_finite() {
            ws.history.push(rel);
            return Err(ws.breakdown(&x, done, "residual", rel));
        }
        if rel <= ws.tol {
            let true_rel = ws.true_residual(&x);
            ws.history.push(true_rel);
            if true_rel <= ws.tol {
                return Ok(ws.finish(&x, done));
            }
            r[0].copy_from_slice(ws.last_true_residual());
        } else {
            ws.history.push(rel);
        }
        if done >= ws.max_iterations {
            return Ok(ws.finish(&x, done));
        }
        if tiny(omega) {
            return Err(ws.breakdown(&x, done, "omega", omega.abs()));
        }
    }
}
