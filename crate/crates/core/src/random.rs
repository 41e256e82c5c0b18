//! Seeded samplers for random unitaries, Hermitian operators and Ω_N observables.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operators::{CMatrix, CVector, HermitianOperator, C64};

pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for stream `stream` of the master seed. Distinct streams are
/// independent ChaCha sequences.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sub-seed derivation: first word of stream `stream` of the master seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    stream_rng(seed, stream).next_u64()
}

fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(n, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE-like).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(n, rng);
    HermitianOperator::from_raw(&g + g.adjoint())
}

/// `U diag(1, 0, …, 0, -1) U^†` with Haar `U`.
pub fn random_omega<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let u = haar_unitary(n, rng);
    let mut d = vec![0.0; n];
    d[0] = 1.0;
    d[n - 1] = -1.0;
    let diag = CMatrix::from_diagonal(&CVector::from_iterator(
        n,
        d.into_iter().map(|x| C64::new(x, 0.0)),
    ));
    HermitianOperator::from_raw(&u * diag * u.adjoint())
}

/// Uniform point on the unit sphere in three dimensions.
pub fn unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::orthonormality_deviation;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = seeded_rng(4);
        for n in 2..=6 {
            assert!(orthonormality_deviation(&haar_unitary(n, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        assert_eq!(derive_seed(9, 1), derive_seed(9, 1));
        assert_ne!(derive_seed(9, 1), derive_seed(9, 2));
        assert_ne!(derive_seed(9, 1), derive_seed(10, 1));
    }
}
