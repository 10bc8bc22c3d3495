//! Tensor-product basis of matter states and photon Fock occupations.

use crate::error::{Error, Result};
use crate::fock::PhotonBasis;
use crate::model::matter::{MatterBasis, MatterModel};
use crate::model::modes::ModeSet;

/// Index bookkeeping for the polariton Hilbert space. The flat index is
/// `matter_index * photon_dim + photon_index`, so the photon factor is
/// contiguous.
#[derive(Debug, Clone)]
pub struct PolaritonBasis {
    matter_dim: usize,
    photon: PhotonBasis,
}

impl PolaritonBasis {
    pub fn new(matter: &MatterBasis, modes: &ModeSet) -> Result<PolaritonBasis> {
        PolaritonBasis::with_limit(matter, modes, crate::operator::MAX_ASSEMBLY_DIM)
    }

    pub fn with_limit(
        matter: &MatterBasis,
        modes: &ModeSet,
        max_dim: usize,
    ) -> Result<PolaritonBasis> {
        modes.validate()?;
        let photon = modes.photon_basis();
        let total = matter
            .dim()
            .checked_mul(photon.dim())
            .ok_or(Error::DimensionOverflow {
                requested: usize::MAX,
                limit: max_dim,
            })?;
        if total > max_dim {
            return Err(Error::DimensionOverflow {
                requested: total,
                limit: max_dim,
            });
        }
        Ok(PolaritonBasis {
            matter_dim: matter.dim(),
            photon,
        })
    }

    /// Build basis directly from a model pair.
    pub fn from_model(matter: &MatterModel, modes: &ModeSet) -> Result<PolaritonBasis> {
        let mb = MatterBasis::new(matter)?;
        PolaritonBasis::new(&mb, modes)
    }

    pub fn matter_dim(&self) -> usize {
        self.matter_dim
    }

    pub fn photon_dim(&self) -> usize {
        self.photon.dim()
    }

    pub fn total_dim(&self) -> usize {
        self.matter_dim * self.photon.dim()
    }

    pub fn photon(&self) -> &PhotonBasis {
        &self.photon
    }

    pub fn flat(&self, matter_index: usize, photon_index: usize) -> usize {
        debug_assert!(matter_index < self.matter_dim);
        debug_assert!(photon_index < self.photon.dim());
        matter_index * self.photon.dim() + photon_index
    }

    pub fn split(&self, flat: usize) -> (usize, usize) {
        debug_assert!(flat < self.total_dim());
        (flat / self.photon.dim(), flat % self.photon.dim())
    }

    /// Flat index from matter index and per-mode occupations.
    pub fn flat_occ(&self, matter_index: usize, occ: &[usize]) -> usize {
        self.flat(matter_index, self.photon.flat(occ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use proptest::prelude::*;

    fn test_basis() -> PolaritonBasis {
        let model = MatterModel::single_electron_harmonic(Grid1D::new(-4.0, 4.0, 7).unwrap(), 1.0);
        let mb = MatterBasis::new(&model).unwrap();
        let modes = crate::model::modes::ModeSet::new(vec![
            crate::model::modes::Mode::new(1.0, 0.0, vec![1.0], 2),
            crate::model::modes::Mode::new(0.5, 0.0, vec![1.0], 3),
        ])
        .unwrap();
        PolaritonBasis::new(&mb, &modes).unwrap()
    }

    #[test]
    fn dimension_budget_enforced() {
        let model = MatterModel::single_electron_harmonic(Grid1D::new(-4.0, 4.0, 50).unwrap(), 1.0);
        let mb = MatterBasis::new(&model).unwrap();
        let modes = crate::model::modes::ModeSet::single(1.0, 0.0, 9);
        match PolaritonBasis::with_limit(&mb, &modes, 100) {
            Err(Error::DimensionOverflow { requested, limit }) => {
                assert_eq!(requested, 500);
                assert_eq!(limit, 100);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn index_maps_are_mutually_inverse(flat in 0usize..(7 * 12)) {
            let basis = test_basis();
            prop_assert_eq!(basis.total_dim(), 7 * 12);
            let (m, p) = basis.split(flat);
            prop_assert_eq!(basis.flat(m, p), flat);
            let occ = basis.photon().occupation(p);
            prop_assert_eq!(basis.flat_occ(m, &occ), flat);
        }
    }
}
