use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn check_shapes(u: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<()> {
    if u.shape() != g.shape() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: g.len() });
    }
    if u.ncols() > u.nrows() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), got: u.ncols() });
    }
    Ok(())
}

/// `‖G Uᵀ - U Gᵀ‖²_F` without forming the `n × n` product.
///
/// With `M = UᵀG` and `G⊥ = G - UM` the skew matrix splits into orthogonal
/// pieces, giving `‖M - Mᵀ‖² + 2‖G⊥‖²`. Assumes `UᵀU = I`.
pub fn skew_norm_sq(u: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    let m = u.transpose() * g;
    let perp = g - u * &m;
    (&m - m.transpose()).norm_squared() + 2.0 * perp.norm_squared()
}

/// One Cayley step from `u` along the descent direction induced by the
/// gradient `g`, solved densely.
pub fn cayley_step(u: &DMatrix<f64>, g: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    check_shapes(u, g)?;
    if tau == 0.0 {
        return Ok(u.clone());
    }
    let n = u.nrows();
    let b = g * u.transpose() - u * g.transpose();
    let half = 0.5 * tau;
    let lhs = DMatrix::identity(n, n) + &b * half;
    let rhs = u - (&b * u) * half;
    let y = lhs.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(Error::SingularSystem)
    }
}

/// Same step via the Sherman-Morrison-Woodbury identity.
///
/// Writing `B = W Vᵀ` with `W = [G, U]`, `V = [U, -G]` gives
/// `U(τ) = U - τ W (I + τ/2 VᵀW)^{-1} VᵀU`, which only needs a `2p × 2p`
/// solve. For a single column this is linear in `n`.
pub fn cayley_step_low_rank(u: &DMatrix<f64>, g: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    check_shapes(u, g)?;
    if tau == 0.0 {
        return Ok(u.clone());
    }
    let (n, p) = u.shape();
    let mut w = DMatrix::zeros(n, 2 * p);
    w.columns_mut(0, p).copy_from(g);
    w.columns_mut(p, p).copy_from(u);
    let mut v = DMatrix::zeros(n, 2 * p);
    v.columns_mut(0, p).copy_from(u);
    v.columns_mut(p, p).copy_from(&(-g));
    let vt = v.transpose();
    let small = DMatrix::identity(2 * p, 2 * p) + (&vt * &w) * (0.5 * tau);
    let z = small.lu().solve(&(&vt * u)).ok_or(Error::SingularSystem)?;
    let y = u - (&w * z) * tau;
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(Error::SingularSystem)
    }
}
