//! Identity suites evaluated at a single sample. Each identity compares two
//! independently computed sides and reports a scaled residual.

use num_complex::Complex64;
use serde::Serialize;

use super::bundle::ConnectionBundle;
use super::covderiv::CovDerivs;
use crate::dsl::Expr;
use crate::error::{Error, Result};
use crate::tensor::{scaled_residual, Tensor, C};

pub const SUITES: [&str; 4] = ["homogeneity", "eq1.3", "lemma2.1", "lemma2.2"];

/// Fixed scaling factor for the homogeneity check `L(z, λη) = |λ|² L(z, η)`.
pub const LAMBDA: Complex64 = Complex64::new(0.6, -1.1);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub id: String,
    pub residual: f64,
    /// Reported but not part of the suite verdict.
    pub informational: bool,
}

fn entry(id: &str, lhs: &Tensor, rhs: &Tensor) -> IdentityResidual {
    IdentityResidual {
        id: id.into(),
        residual: scaled_residual(&lhs.sub(rhs), &[lhs, rhs]),
        informational: false,
    }
}

fn zero_entry(id: &str, t: &Tensor, inputs: &[&Tensor]) -> IdentityResidual {
    IdentityResidual {
        id: id.into(),
        residual: scaled_residual(t, inputs),
        informational: false,
    }
}

fn sum(n: usize, f: impl Fn(usize) -> C) -> C {
    (0..n).map(f).sum()
}

pub fn run_suite(suite: &str, l: &Expr, b: &ConnectionBundle, cd: &CovDerivs) -> Result<Vec<IdentityResidual>> {
    match suite {
        "homogeneity" => homogeneity(l, b),
        "eq1.3" => Ok(eq13(b, cd)),
        "lemma2.1" => Ok(lemma21(b, cd)),
        "lemma2.2" => Ok(lemma22(b, cd)),
        other => Err(Error::UnknownSuite(other.into())),
    }
}

fn homogeneity(l: &Expr, b: &ConnectionBundle) -> Result<Vec<IdentityResidual>> {
    let n = b.dim();
    let s = &b.sample;
    let scaled_eta: Vec<C> = s.eta.iter().map(|e| e * LAMBDA).collect();
    let l1 = l.eval_at(&s.z, &s.eta)?;
    let l2 = l.eval_at(&s.z, &scaled_eta)?;
    let want = l1 * LAMBDA.norm_sqr();
    let eta = b.eta();
    let etab = b.eta_bar();
    let g_eta = sum(n, |i| sum(n, |j| b.g.0[[i, j]] * eta[i] * etab[j]));
    let euler = sum(n, |i| b.d.eta_lower[i] * eta[i]);
    let scalar = |x: C| Tensor::vector(&[x]);
    Ok(vec![
        entry("homogeneity.scaling", &scalar(l2), &scalar(want)),
        entry("homogeneity.g_contraction", &scalar(g_eta), &scalar(b.l)),
        entry("homogeneity.euler", &scalar(euler), &scalar(b.l)),
        zero_entry("homogeneity.cartan_eta", &b.c.contract(2, eta)?, &[&b.c]),
        zero_entry("homogeneity.cartanbar_etabar", &b.cbar.contract(2, &etab)?, &[&b.cbar]),
    ])
}

fn eq13(b: &ConnectionBundle, cd: &CovDerivs) -> Vec<IdentityResidual> {
    let eta = b.eta();
    let two_g: Vec<C> = b.spray.iter().map(|x| x * 2.0).collect();
    let two_g = Tensor::vector(&two_g);
    let n_eta = b.n.contract(1, eta).expect("shapes match");
    let cn_eta = b.cn.contract(1, eta).expect("shapes match");
    let bl_eta =
        b.bl.contract(2, eta)
            .and_then(|t| t.contract(1, eta))
            .expect("shapes match");
    // η^i_{|k} = δ_k η^i + L^i_{jk} η^j = −N^i_k + L^i_{jk} η^j.
    let l_eta = b.l_cf.contract(1, eta).expect("shapes match");
    // η^i|_k − δ^i_k = C^i_{jk} η^j.
    let c_eta = b.c_cf.contract(1, eta).expect("shapes match");
    vec![
        zero_entry("eq1.3.metric_compat", &cd.g_cf, &[&b.d.dz_g, &b.g.0]),
        zero_entry("eq1.3.metric_compat_bar", &cd.g_cf_bar, &[&b.d.dzbar_g, &b.g.0]),
        entry("eq1.3.eta_horizontal", &l_eta, &b.n),
        zero_entry("eq1.3.eta_vertical", &c_eta, &[&b.c_cf]),
        entry("eq1.3.n_displayed", &b.n, &b.d.n_displayed),
        entry("eq1.3.l_two_ways", &b.l_cf, &b.d.l_cf_frame),
        entry("eq1.3.spray_n", &two_g, &n_eta),
        entry("eq1.3.spray_cn", &two_g, &cn_eta),
        entry("eq1.3.spray_bl", &two_g, &bl_eta),
        entry("eq1.3.bl_symmetric", &b.bl, &b.bl.permuted(&[0, 2, 1])),
    ]
}

fn lemma21(b: &ConnectionBundle, cd: &CovDerivs) -> Vec<IdentityResidual> {
    let n = b.dim();
    let (g, c, d) = (&b.g.0, &b.c, &b.d);
    let rhs_i = Tensor::from_fn(n, 4, |ix| {
        let (l, r, h, k) = (ix[0], ix[1], ix[2], ix[3]);
        sum(n, |i| d.d_lcf[[i, l, k, h]] * g[[i, r]])
    });
    let rhs_ii = Tensor::from_fn(n, 4, |ix| {
        let (l, r, h, k) = (ix[0], ix[1], ix[2], ix[3]);
        sum(n, |i| {
            d.d_lcf_bar[[i, l, k, h]] * g[[i, r]] + b.dnbar[[i, k, h]] * c[[i, r, l]]
        })
    });
    vec![
        entry("lemma2.1.i", &cd.c_cf_h, &rhs_i),
        entry("lemma2.1.ii", &cd.c_cf_hbar_arg, &rhs_ii),
    ]
}

/// Right side of the Berwald `C_{i j̄ h̄ B|k}` identity, indexed `[i, j, h, k]`.
fn lemma22_v_rhs(b: &ConnectionBundle) -> Tensor {
    let n = b.dim();
    let (g, c, cbar, d) = (&b.g.0, &b.c, &b.cbar, &b.d);
    Tensor::from_fn(n, 4, |ix| {
        let (i, j, h, k) = (ix[0], ix[1], ix[2], ix[3]);
        d.d_gb_bar[[i, j, k, h]] + sum(n, |l| b.blbar[[l, k, h]] * c[[i, j, l]])
            - sum(n, |m| b.blbar[[m, h, k]].conj() * cbar[[i, j, m]])
            + sum(n, |l| d.d_bl_bar[[l, i, k, h]] * g[[l, j]])
            + sum(n, |m| d.d_blbar[[m, j, k, h]].conj() * g[[i, m]])
    })
}

fn lemma22(b: &ConnectionBundle, cd: &CovDerivs) -> Vec<IdentityResidual> {
    let n = b.dim();
    let (g, d) = (&b.g.0, &b.d);
    let eta = b.eta();
    let etab = b.eta_bar();

    let i_lhs = b.blbar.contract(2, &etab).expect("shapes match");

    let cb0 = cd.c_b_h.contract(3, eta).expect("shapes match");
    let gb = &cd.g_b;
    let ii_rhs = Tensor::from_fn(n, 3, |ix| {
        let (l, r, h) = (ix[0], ix[1], ix[2]);
        gb[[l, r, h]]
            + gb[[h, r, l]]
            + sum(n, |m| b.blbar[[m, r, h]].conj() * g[[l, m]])
            + sum(n, |m| b.blbar[[m, r, l]].conj() * g[[h, m]])
    });
    let ii_lhs = cb0.scale(C::new(-1.0, 0.0));

    let two_dg = Tensor::from_fn(n, 2, |ix| {
        let (r, h) = (ix[0], ix[1]);
        2.0 * sum(n, |i| b.dgbar[[i, h]] * g[[i, r]])
    });
    let contract_lk = |t: &Tensor| {
        t.contract(3, eta)
            .and_then(|x| x.contract(0, eta))
            .expect("shapes match")
    };
    let c0_b = contract_lk(&cd.c_b_hbar_arg);
    let c0_cf = contract_lk(&cd.c_cf_hbar_arg);

    let iv_rhs = Tensor::from_fn(n, 4, |ix| {
        let (i, j, h, k) = (ix[0], ix[1], ix[2], ix[3]);
        d.d_gb[[i, j, k, h]]
            + sum(n, |l| d.d_bl[[l, i, k, h]] * g[[l, j]])
            + sum(n, |m| d.d_blbar_bar[[m, j, k, h]].conj() * g[[i, m]])
    });

    let v_rhs = lemma22_v_rhs(b);
    // Literal reading: the barred index on the left (r̄) independent of the
    // one on the right (j̄).
    let mut literal = 0.0f64;
    let scale = 1.0 + cd.c_b_hbar_arg.max_abs().max(v_rhs.max_abs());
    for i in 0..n {
        for r in 0..n {
            for j in 0..n {
                for h in 0..n {
                    for k in 0..n {
                        let diff = cd.c_b_hbar_arg[[i, r, h, k]] - v_rhs[[i, j, h, k]];
                        literal = literal.max(diff.norm() / scale);
                    }
                }
            }
        }
    }

    let bar_conj = cd.c_b_hbar_arg.conj().permuted(&[1, 0, 2, 3]);

    vec![
        zero_entry("lemma2.2.i", &i_lhs, &[&b.blbar]),
        entry("lemma2.2.ii", &ii_lhs, &ii_rhs),
        entry("lemma2.2.iii.berwald", &two_dg, &c0_b),
        entry("lemma2.2.iii.chern_finsler", &two_dg, &c0_cf),
        entry("lemma2.2.iv", &cd.c_b_h, &iv_rhs),
        entry("lemma2.2.v", &cd.c_b_hbar_arg, &v_rhs),
        IdentityResidual {
            id: "lemma2.2.v.literal".into(),
            residual: literal,
            informational: true,
        },
        entry("lemma2.2.bar_conjugation", &bar_conj, &cd.c_b_bar),
    ]
}

/// All suites at one sample.
pub fn run_all(l: &Expr, b: &ConnectionBundle, cd: &CovDerivs) -> Result<Vec<IdentityResidual>> {
    let mut out = Vec::new();
    for s in SUITES {
        out.extend(run_suite(s, l, b, cd)?);
    }
    Ok(out)
}
