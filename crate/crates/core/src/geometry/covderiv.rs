//! Horizontal covariant derivatives of the Cartan tensors.
//!
//! Barred-index corrections use conjugated coefficients:
//! `BL^{m̄}_{r̄ k} = conj(BL^m_{r k̄})` and `BL^{m̄}_{r̄ k̄} = conj(BL^m_{r k})`.
//! For `B|k̄` the unbarred indices are corrected with `BL^i_{j k̄}` and the
//! frame derivative is `cδ_{k̄} = ∂_{z̄^k} − conj(cN^j_k) ∂̇_{j̄}`.

use super::bundle::ConnectionBundle;
use crate::tensor::{Tensor, Tensor3, Tensor4, C};

#[derive(Clone, Debug)]
pub struct CovDerivs {
    /// `C_{l r̄ h|k}` (Chern-Finsler) at `[l, r, h, k]`.
    pub c_cf_h: Tensor4,
    /// `C_{l r̄ h|k̄}` at `[l, r, h, k]`.
    pub c_cf_hbar: Tensor4,
    /// `C_{l r̄ h̄|k}` at `[l, r, h, k]`.
    pub c_cf_hbar_arg: Tensor4,
    /// `C_{l r̄ h B|k}` at `[l, r, h, k]`.
    pub c_b_h: Tensor4,
    /// `C_{l r̄ h̄ B|k}` at `[l, r, h, k]`.
    pub c_b_hbar_arg: Tensor4,
    /// `C_{l r̄ h B|k̄}` at `[l, r, h, k]`.
    pub c_b_bar: Tensor4,
    /// `g_{i j̄ B|k}` at `[i, j, k]`.
    pub g_b: Tensor3,
    /// `g_{i j̄|k}` (Chern-Finsler) at `[i, j, k]`.
    pub g_cf: Tensor3,
    /// `g_{i j̄|k̄}` (Chern-Finsler) at `[i, j, k]`.
    pub g_cf_bar: Tensor3,
}

fn sum(n: usize, f: impl Fn(usize) -> C) -> C {
    (0..n).map(f).sum()
}

impl CovDerivs {
    pub fn compute(b: &ConnectionBundle) -> CovDerivs {
        let n = b.dim();
        let d = &b.d;
        let (c, cbar, g) = (&b.c, &b.cbar, &b.g.0);
        let (nn, cn, l, bl, blbar) = (&b.n, &b.cn, &b.l_cf, &b.bl, &b.blbar);
        let t4 =
            |f: &dyn Fn(usize, usize, usize, usize) -> C| Tensor::from_fn(n, 4, |ix| f(ix[0], ix[1], ix[2], ix[3]));
        let t3 = |f: &dyn Fn(usize, usize, usize) -> C| Tensor::from_fn(n, 3, |ix| f(ix[0], ix[1], ix[2]));

        // Adapted-frame derivatives of C and Cbar.
        let delta_c = t4(&|l_, r, h, k| d.dz_c[[l_, r, h, k]] - sum(n, |j| nn[[j, k]] * d.deta_c[[l_, r, h, j]]));
        let deltabar_c =
            t4(&|l_, r, h, k| d.dzbar_c[[l_, r, h, k]] - sum(n, |j| nn[[j, k]].conj() * d.detabar_c[[l_, r, h, j]]));
        let delta_cbar =
            t4(&|l_, r, h, k| d.dz_cbar[[l_, r, h, k]] - sum(n, |j| nn[[j, k]] * d.deta_cbar[[l_, r, h, j]]));
        let cdelta_c = t4(&|l_, r, h, k| d.dz_c[[l_, r, h, k]] - sum(n, |j| cn[[j, k]] * d.deta_c[[l_, r, h, j]]));
        let cdeltabar_c =
            t4(&|l_, r, h, k| d.dzbar_c[[l_, r, h, k]] - sum(n, |j| cn[[j, k]].conj() * d.detabar_c[[l_, r, h, j]]));
        let cdelta_cbar =
            t4(&|l_, r, h, k| d.dz_cbar[[l_, r, h, k]] - sum(n, |j| cn[[j, k]] * d.deta_cbar[[l_, r, h, j]]));

        let c_cf_h = t4(&|l_, r, h, k| {
            delta_c[[l_, r, h, k]] - sum(n, |m| l[[m, l_, k]] * c[[m, r, h]]) - sum(n, |m| l[[m, h, k]] * c[[l_, r, m]])
        });
        let c_cf_hbar_arg = t4(&|l_, r, h, k| delta_cbar[[l_, r, h, k]] - sum(n, |m| l[[m, l_, k]] * cbar[[m, r, h]]));
        let c_cf_hbar = t4(&|l_, r, h, k| deltabar_c[[l_, r, h, k]] - sum(n, |m| l[[m, r, k]].conj() * c[[l_, m, h]]));

        let c_b_h = t4(&|l_, r, h, k| {
            cdelta_c[[l_, r, h, k]]
                - sum(n, |m| bl[[m, l_, k]] * c[[m, r, h]])
                - sum(n, |m| bl[[m, h, k]] * c[[l_, r, m]])
                - sum(n, |m| blbar[[m, r, k]].conj() * c[[l_, m, h]])
        });
        let c_b_hbar_arg = t4(&|l_, r, h, k| {
            cdelta_cbar[[l_, r, h, k]]
                - sum(n, |m| bl[[m, l_, k]] * cbar[[m, r, h]])
                - sum(n, |m| blbar[[m, r, k]].conj() * cbar[[l_, m, h]])
                - sum(n, |m| blbar[[m, h, k]].conj() * cbar[[l_, r, m]])
        });
        let c_b_bar = t4(&|j, r, h, k| {
            cdeltabar_c[[j, r, h, k]]
                - sum(n, |m| blbar[[m, j, k]] * c[[m, r, h]])
                - sum(n, |m| blbar[[m, h, k]] * c[[j, r, m]])
                - sum(n, |m| bl[[m, r, k]].conj() * c[[j, m, h]])
        });

        let g_cf = t3(&|i, j, k| {
            d.dz_g[[i, j, k]] - sum(n, |m| nn[[m, k]] * c[[i, j, m]]) - sum(n, |m| l[[m, i, k]] * g[[m, j]])
        });
        let g_cf_bar = t3(&|i, j, k| {
            d.dzbar_g[[i, j, k]]
                - sum(n, |m| nn[[m, k]].conj() * cbar[[i, j, m]])
                - sum(n, |m| l[[m, j, k]].conj() * g[[i, m]])
        });

        CovDerivs {
            c_cf_h,
            c_cf_hbar,
            c_cf_hbar_arg,
            c_b_h,
            c_b_hbar_arg,
            c_b_bar,
            g_b: d.g_b.clone(),
            g_cf,
            g_cf_bar,
        }
    }
}
