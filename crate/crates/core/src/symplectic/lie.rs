//! Time-one maps of Hamiltonian flows generated by jets vanishing to second
//! order at the zero section.

use crate::error::{KamError, Result};
use crate::jet::ActionJet;
use crate::scalar::Real;

/// `H o Phi_W^1 = sum_j ad_W^j H / j!` with `ad_W H = {W, H}`. The series stops
/// at jet degree because every bracket with `W = O(r^2)` raises the lowest
/// degree by at least one.
pub fn lie_transform<T: Real>(h: &ActionJet<T>, w: &ActionJet<T>) -> Result<ActionJet<T>> {
    if let Some(low) = w.min_degree() {
        if low < 2 {
            return Err(KamError::GeneratorDegree(low));
        }
    } else {
        return Ok(h.clone());
    }
    let mut acc = h.clone();
    let mut term = h.clone();
    for j in 1..=h.degree().max(w.degree()) + 1 {
        term = w.poisson_bracket(&term)?.scale(T::one() / T::from_usize_lossy(j));
        if term.min_degree().is_none() {
            break;
        }
        acc = acc.try_add(&term)?;
    }
    Ok(acc)
}
