use nalgebra::DMatrix;

use crate::measurements::HermitianOp;

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]`; each
/// eigenvalue of `H` appears twice.
pub fn embed_complex(h: &HermitianOp) -> DMatrix<f64> {
    let m = h.matrix();
    let d = h.dim();
    DMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = m[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::CMatrix;
    use num_complex::Complex64;

    #[test]
    fn identity_embeds_to_identity() {
        let h = HermitianOp::new(CMatrix::identity(2, 2)).unwrap();
        assert_eq!(embed_complex(&h), DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn pauli_y_spectrum_doubles() {
        let i = Complex64::i();
        let y = CMatrix::from_row_slice(2, 2, &[0.0.into(), -i, i, 0.0.into()]);
        let e = embed_complex(&HermitianOp::new(y).unwrap());
        assert_eq!(e, e.transpose());
        let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_hermitian_min_eigenvalue_preserved() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for d in 1..6 {
            let a = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let h = HermitianOp::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap();
            let mine = embed_complex(&h).symmetric_eigenvalues().min();
            assert!((mine - h.min_eigenvalue()).abs() < 1e-10);
        }
    }
}
