//! Odd-length sliding windows with replicate padding at the sequence edges.

use crate::{Error, Result};

/// Half-width of an odd window, rejecting even or zero lengths.
pub fn half_width(k: usize) -> Result<usize> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "window length must be odd and positive, got {k}"
        )));
    }
    Ok(k / 2)
}

/// Source indices of a length-`k` window centred at `j` over a sequence of
/// length `n`, edge frames repeated where the window runs off either end.
pub fn padded_indices(n: usize, j: usize, k: usize) -> Result<Vec<usize>> {
    let delta = half_width(k)?;
    if j >= n {
        return Err(Error::invalid(format!(
            "window centre {j} out of range for sequence of length {n}"
        )));
    }
    let last = n as isize - 1;
    Ok((0..k)
        .map(|c| (j as isize + c as isize - delta as isize).clamp(0, last) as usize)
        .collect())
}
