//! Pointwise residual atoms. Class predicates are maxima of atoms; the
//! "depends only on z" atoms also get a dispersion counterpart computed
//! over samples sharing a base point.

use crate::geometry::{ConnectionBundle, CovDerivs};
use crate::tensor::{scaled_residual, Tensor, C};

/// Tensors whose z-only dependence is tested by dispersion.
pub const DISPERSED: [&str; 5] = ["bl", "cl", "l_cf", "g_b", "clbar_g"];

#[derive(Clone, Debug)]
pub struct Atoms {
    pub values: Vec<(&'static str, f64)>,
    pub dispersed: Vec<(&'static str, Tensor)>,
}

fn sum(n: usize, f: impl Fn(usize) -> C) -> C {
    (0..n).map(f).sum()
}

fn zero(t: &Tensor, inputs: &[&Tensor]) -> f64 {
    scaled_residual(t, inputs)
}

fn diff(a: &Tensor, b: &Tensor) -> f64 {
    scaled_residual(&a.sub(b), &[a, b])
}

/// Kähler residuals `(strong, kahler, weak)`: `T`, `T^i_{jk} η^j`,
/// `g_{i l̄} T^i_{jk} η^j η̄^l`.
pub fn kahler(b: &ConnectionBundle) -> (f64, f64, f64) {
    let n = b.dim();
    let eta = b.eta();
    let etab = b.eta_bar();
    let t_eta = b.torsion.contract(1, eta).expect("shapes match");
    let weak = Tensor::from_fn(n, 1, |ix| {
        let k = ix[0];
        sum(n, |i| sum(n, |l| b.g.0[[i, l]] * t_eta[[i, k]] * etab[l]))
    });
    let inputs = [&b.l_cf];
    (
        zero(&b.torsion, &inputs),
        zero(&t_eta, &inputs),
        zero(&weak, &[&b.l_cf, &b.g.0]),
    )
}

pub fn compute(b: &ConnectionBundle, cd: &CovDerivs) -> Atoms {
    let n = b.dim();
    let eta = b.eta();
    let etab = b.eta_bar();
    let g = &b.g.0;
    let d = &b.d;
    let (strong, t_eta, t_weak) = kahler(b);

    let c_b_0 = cd.c_b_h.contract(3, eta).expect("shapes match");
    // c_b_bar is indexed [j, r, h, k] for C_{j r̄ h B|k̄}.
    let c_b_bar_0 = cd.c_b_bar.contract(3, &etab).expect("shapes match");
    let c_b_bar_00 = c_b_bar_0.contract(1, &etab).expect("shapes match");

    let thm31iii = Tensor::from_fn(n, 4, |ix| {
        let (j, k, h, r) = (ix[0], ix[1], ix[2], ix[3]);
        2.0 * sum(n, |i| d.d_bl[[i, j, k, h]] * g[[i, r]])
            - sum(n, |m| b.blbar[[m, r, k]].conj() * b.c[[j, m, h]])
            - sum(n, |m| b.blbar[[m, r, j]].conj() * b.c[[k, m, h]])
            - (cd.c_b_h[[j, r, h, k]] + cd.c_b_h[[k, r, h, j]])
    });
    let clbar_g = Tensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        sum(n, |m| b.clbar[[m, j, k]].conj() * g[[i, m]])
    });
    let blbar_g = Tensor::from_fn(n, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        sum(n, |m| b.blbar[[m, j, k]].conj() * g[[i, m]])
    });
    let gb = &cd.g_b;
    let thm31iv = gb.sub(&clbar_g).add(&blbar_g);
    let thm32iv = gb.sub(&clbar_g);
    let thm32v_a = cd.c_b_h.add(&cd.c_b_h.permuted(&[3, 1, 2, 0]));
    let thm32v_b = cd.c_b_bar.add(&cd.c_b_bar.permuted(&[0, 3, 2, 1]));

    let d_gb = zero(&d.d_gb, &[gb, &b.c]).max(zero(&d.d_gb_bar, &[gb, &b.c]));
    let d_bl = zero(&d.d_bl, &[&b.bl]).max(zero(&d.d_bl_bar, &[&b.bl]));
    let d_lcf = zero(&d.d_lcf, &[&b.l_cf]).max(zero(&d.d_lcf_bar, &[&b.l_cf]));
    let c_inputs = [&d.dz_c, &b.c];
    let c_cf_h = zero(&cd.c_cf_h, &c_inputs);
    let c_cf_hbar = zero(&cd.c_cf_hbar, &c_inputs);

    let values = vec![
        ("torsion", strong),
        ("torsion_eta", t_eta),
        ("torsion_weak", t_weak),
        ("bl_minus_cl", diff(&b.bl, &b.cl)),
        ("c_b_0", zero(&c_b_0, &c_inputs)),
        ("thm3.1.iii", zero(&thm31iii, &[&d.d_bl, &cd.c_b_h, &b.c])),
        ("thm3.1.iv", zero(&thm31iv, &[gb, &clbar_g, &blbar_g])),
        ("dgbar", zero(&b.dgbar, &[&b.cn])),
        ("c_b_bar_0", zero(&c_b_bar_0, &c_inputs)),
        ("c_b_bar_00", zero(&c_b_bar_00, &c_inputs)),
        ("thm3.2.iv", zero(&thm32iv, &[gb, &clbar_g])),
        ("thm3.2.v.h", zero(&thm32v_a, &c_inputs)),
        ("thm3.2.v.hbar", zero(&thm32v_b, &c_inputs)),
        ("d_gb", d_gb),
        ("c_b_h", zero(&cd.c_b_h, &c_inputs)),
        ("c_b_bar", zero(&cd.c_b_bar, &c_inputs)),
        ("blbar_minus_clbar", diff(&b.blbar, &b.clbar)),
        ("bl_minus_lcf", diff(&b.bl, &b.l_cf)),
        ("d_lcf", d_lcf),
        ("d_bl", d_bl),
        ("g_b", zero(gb, &[&d.dz_g, g])),
        ("c_cf_h", c_cf_h),
        ("c_cf_hbar", c_cf_hbar),
        ("c_cf_either", c_cf_h.min(c_cf_hbar)),
        ("blbar", zero(&b.blbar, &[&b.bl])),
    ];
    let dispersed = vec![
        ("bl", b.bl.clone()),
        ("cl", b.cl.clone()),
        ("l_cf", b.l_cf.clone()),
        ("g_b", gb.clone()),
        ("clbar_g", clbar_g),
    ];
    Atoms { values, dispersed }
}

/// Max pairwise entry difference within a group of same-z samples,
/// scaled like the pointwise residuals.
pub fn dispersion(group: &[&Tensor]) -> f64 {
    let scale = 1.0 + group.iter().map(|t| t.max_abs()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for (a, x) in group.iter().enumerate() {
        for y in &group[a + 1..] {
            worst = worst.max(x.sub(y).max_abs());
        }
    }
    worst / scale
}
