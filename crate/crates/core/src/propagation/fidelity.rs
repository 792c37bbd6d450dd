use crate::error::{Error, Result};
use crate::linalg::{trace, unitary_superop, CMat};

/// Average gate fidelity `(Tr(MM†) + |Tr M|²) / (d(d+1))` with `M = U†V`.
///
/// For unitary `V` this is `(|Tr(U†V)|² + d)/(d(d+1))`. A three-level `V`
/// is scored on its qubit block.
pub fn gate_fidelity(u: &CMat, v: &CMat) -> Result<f64> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: u.ncols() });
    }
    let block = if v.nrows() == d && v.ncols() == d {
        v.clone()
    } else if d == 2 && v.nrows() == 3 && v.ncols() == 3 {
        v.view((0, 0), (2, 2)).into_owned()
    } else {
        return Err(Error::DimensionMismatch { expected: d, actual: v.nrows() });
    };
    let m = u.adjoint() * block;
    let tr = trace(&m).norm_sqr();
    let tmm = trace(&(&m * m.adjoint())).re;
    Ok(((tmm + tr) / (d * (d + 1)) as f64).clamp(0.0, 1.0))
}

/// Average fidelity of a superoperator to a target unitary.
pub fn channel_fidelity(u: &CMat, channel: &CMat) -> Result<f64> {
    let d = u.nrows();
    if channel.nrows() != d * d {
        return Err(Error::DimensionMismatch { expected: d * d, actual: channel.nrows() });
    }
    let process = trace(&(unitary_superop(u).adjoint() * channel)).re / (d * d) as f64;
    Ok(((d as f64 * process + 1.0) / (d as f64 + 1.0)).clamp(0.0, 1.0))
}
