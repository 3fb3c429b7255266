//! Linear symplectic reduction by a coisotropic subspace.

use crate::error::{GeomError, Result};
use crate::fanning::{standard_omega, SymplecticForm};
use crate::numkit::{column_space, lstsq, max_abs, nullspace, rank, Mat, Vector, RANK_TOL};

/// Basis of the Ω-annihilator `𝕎^ω` of `span(w)`.
pub fn symplectic_complement(omega: &SymplecticForm, w: &Mat) -> Result<Mat> {
    if w.nrows() != omega.dim() {
        return Err(GeomError::DimensionMismatch(format!("basis in R^{} for a form on R^{}", w.nrows(), omega.dim())));
    }
    if rank(w, RANK_TOL) != w.ncols() {
        return Err(GeomError::RankDeficient);
    }
    Ok(nullspace(&(w.transpose() * omega.matrix()), RANK_TOL))
}

/// A coisotropic subspace `𝕎 ⊂ (ℝ²ⁿ, Ω)` with a Darboux basis of the
/// quotient `𝕎/𝕎^ω` and the projection onto it.
#[derive(Clone, Debug)]
pub struct CoisotropicSetup {
    pub omega: SymplecticForm,
    /// Orthonormal basis of `𝕎`, `2n × k`.
    pub w: Mat,
    /// Orthonormal basis of `𝕎^ω`, `2n × (2n − k)`.
    pub w_omega: Mat,
    /// Representatives `[e₁ … e_r | f₁ … f_r]` of a Darboux basis of the
    /// quotient, `Ω(eᵢ, fⱼ) = δᵢⱼ`.
    pub quotient: Mat,
    /// `π`, `2r × 2n`, with `π(eᵢ) = ∂_{xᵢ}`, `π(fᵢ) = ∂_{yᵢ}`, and
    /// `π(𝕎^ω) = 0`.
    pub pi: Mat,
    /// `r`, half the quotient dimension.
    pub r: usize,
}

impl CoisotropicSetup {
    pub fn new(omega: SymplecticForm, w_basis: &Mat) -> Result<Self> {
        let wo = symplectic_complement(&omega, w_basis)?;
        let w = column_space(w_basis, RANK_TOL);
        // 𝕎^ω ⊂ 𝕎
        let leak = if wo.ncols() == 0 { 0.0 } else { max_abs(&(&wo - &w * (w.transpose() * &wo))) };
        if leak > 1e-9 {
            return Err(GeomError::NotCoisotropic(leak));
        }
        let reps = if wo.ncols() == 0 {
            w.clone()
        } else {
            // w is orthonormal, so an absolute threshold is scale-free here
            let proj = Mat::identity(w.nrows(), w.nrows()) - &wo * wo.transpose();
            let svd = (proj * &w).svd(true, false);
            let u = svd.u.expect("u requested");
            let cols: Vec<Vector> = (0..svd.singular_values.len())
                .filter(|&i| svd.singular_values[i] > RANK_TOL)
                .map(|i| u.column(i).into_owned())
                .collect();
            if cols.is_empty() {
                Mat::zeros(w.nrows(), 0)
            } else {
                Mat::from_columns(&cols)
            }
        };
        if reps.ncols() % 2 != 0 || reps.ncols() + 2 * wo.ncols() != w.nrows() {
            return Err(GeomError::InternalInconsistency(format!(
                "quotient of dimension {} with complement of dimension {}",
                reps.ncols(),
                wo.ncols()
            )));
        }
        let quotient = darboux(&omega, &reps)?;
        let r = quotient.ncols() / 2;
        let om = omega.matrix();
        let mut pi = Mat::zeros(2 * r, w.nrows());
        for i in 0..r {
            let e = quotient.column(i);
            let f = quotient.column(r + i);
            pi.row_mut(i).copy_from(&(om * f).transpose());
            pi.row_mut(r + i).copy_from(&(-(om * e)).transpose());
        }
        Ok(CoisotropicSetup { omega, w, w_omega: wo, quotient, pi, r })
    }

    /// The standard form on the quotient, in the Darboux basis.
    pub fn reduced_omega(&self) -> SymplecticForm {
        SymplecticForm::standard(self.r)
    }

    /// `max |πᵀΩ_Rπ − Ω|` restricted to `𝕎`, zero for a correct setup.
    pub fn pullback_residual(&self) -> f64 {
        let om_r = standard_omega(self.r);
        let lhs = self.w.transpose() * self.pi.transpose() * om_r * &self.pi * &self.w;
        let rhs = self.w.transpose() * self.omega.matrix() * &self.w;
        max_abs(&(lhs - rhs))
    }

    /// Distance of the columns of `m` from `𝕎`.
    pub fn membership_residual(&self, m: &Mat) -> f64 {
        max_abs(&(m - &self.w * (self.w.transpose() * m)))
    }
}

/// Symplectic Gram–Schmidt on a basis of a symplectic subspace; returns
/// `[e₁ … e_r | f₁ … f_r]` with `Ω(eᵢ, fⱼ) = δᵢⱼ`, `Ω(eᵢ, eⱼ) = Ω(fᵢ, fⱼ) = 0`.
fn darboux(omega: &SymplecticForm, basis: &Mat) -> Result<Mat> {
    let om = omega.matrix();
    let pair = |u: &Vector, v: &Vector| u.dot(&(om * v));
    let mut rest: Vec<Vector> = basis.column_iter().map(|c| c.into_owned()).collect();
    let (mut es, mut fs) = (Vec::new(), Vec::new());
    while let Some(e) = rest.first().cloned() {
        rest.remove(0);
        let (idx, val) = rest
            .iter()
            .enumerate()
            .map(|(i, u)| (i, pair(&e, u)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or(GeomError::SingularTransform)?;
        if val.abs() < 1e-10 * e.norm() * rest[idx].norm() {
            return Err(GeomError::SingularTransform);
        }
        let f = rest.remove(idx) / val;
        for u in rest.iter_mut() {
            let (uf, ue) = (pair(u, &f), pair(u, &e));
            *u -= &e * uf - &f * ue;
        }
        es.push(e);
        fs.push(f);
    }
    let cols: Vec<Vector> = es.into_iter().chain(fs).collect();
    if cols.is_empty() {
        return Ok(Mat::zeros(basis.nrows(), 0));
    }
    Ok(Mat::from_columns(&cols))
}

/// Coordinates of the columns of `m` in the basis `b` (least squares) and
/// the residual of the fit relative to `m`.
pub(crate) fn coords_in(b: &Mat, m: &Mat) -> (Mat, f64) {
    let c = lstsq(b, m);
    let res = max_abs(&(b * &c - m)) / max_abs(m).max(1e-300);
    (c, res)
}

