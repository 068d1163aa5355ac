//! Named measurement families.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::{CMatrix, HermitianOp, MeasurementError, MeasurementSet, Povm};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli(which: char) -> CMatrix {
    let (o, l, i) = (c(0.0), c(1.0), Complex64::i());
    match which {
        'I' => CMatrix::identity(2, 2),
        'X' => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        'Y' => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        'Z' => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => unreachable!(),
    }
}

fn pauli_string(s: &str) -> CMatrix {
    s.chars().fold(CMatrix::identity(1, 1), |acc, ch| acc.kronecker(&pauli(ch)))
}

/// Dichotomic measurement `{(1+O)/2, (1−O)/2}` of a Hermitian unitary `O`.
fn dichotomic(o: &CMatrix) -> Povm {
    Povm::new(vec![HermitianOp::affine(0.5, 0.5, o), HermitianOp::affine(0.5, -0.5, o)])
        .expect("Hermitian unitaries give projective measurements")
}

fn basis_measurement(vectors: &[DVector<Complex64>]) -> Povm {
    let effects = vectors.iter().map(|v| HermitianOp::from_trusted(v * v.adjoint())).collect();
    Povm::new(effects).expect("orthonormal bases give projective measurements")
}

/// Eigenbases of the Pauli operators X, Y and Z.
pub fn pauli_qubit_bases() -> MeasurementSet {
    let povms = ['X', 'Y', 'Z'].iter().map(|&p| dichotomic(&pauli(p))).collect();
    MeasurementSet::new(povms).expect("valid by construction")
}

/// `k` pairwise anticommuting Hermitian unitaries on `2^⌊k/2⌋` dimensions:
/// Jordan–Wigner chains `Z…Z X I…I`, `Z…Z Y I…I`, plus `Z…Z` when `k` is odd.
pub fn anticommuting_observables(k: usize) -> Result<Vec<CMatrix>, MeasurementError> {
    if k == 0 {
        return Err(MeasurementError::InvalidArgument("k must be at least 1".into()));
    }
    let n = k / 2;
    let mut ops = Vec::with_capacity(k);
    for j in 0..n {
        for p in ['X', 'Y'] {
            let s: String = (0..n).map(|q| if q < j { 'Z' } else if q == j { p } else { 'I' }).collect();
            ops.push(pauli_string(&s));
        }
    }
    if k % 2 == 1 {
        ops.push(pauli_string(&"Z".repeat(n)));
    }
    Ok(ops)
}

/// Dichotomic projective measurements of [`anticommuting_observables`].
pub fn anticommuting_dichotomic(k: usize) -> Result<MeasurementSet, MeasurementError> {
    let povms = anticommuting_observables(k)?.iter().map(dichotomic).collect();
    MeasurementSet::new(povms)
}

fn normalised(entries: Vec<Complex64>) -> DVector<Complex64> {
    let v = DVector::from_vec(entries);
    let n = v.norm();
    v / c(n)
}

fn prime_bases(d: usize) -> Vec<Vec<DVector<Complex64>>> {
    if d == 2 {
        let r = 1.0 / 2f64.sqrt();
        let i = Complex64::i();
        return vec![
            vec![normalised(vec![c(1.0), c(0.0)]), normalised(vec![c(0.0), c(1.0)])],
            vec![normalised(vec![c(r), c(r)]), normalised(vec![c(r), c(-r)])],
            vec![normalised(vec![c(r), i * r]), normalised(vec![c(r), -i * r])],
        ];
    }
    let mut bases = vec![(0..d)
        .map(|j| DVector::from_fn(d, |i, _| c(if i == j { 1.0 } else { 0.0 })))
        .collect::<Vec<_>>()];
    for a in 0..d {
        bases.push(
            (0..d)
                .map(|b| {
                    normalised(
                        (0..d)
                            .map(|j| {
                                let phase = ((a * j * j + b * j) % d) as f64;
                                Complex64::from_polar(1.0, 2.0 * PI * phase / d as f64)
                            })
                            .collect(),
                    )
                })
                .collect(),
        );
    }
    bases
}

/// Five classes of three commuting two-qubit Pauli operators; their joint
/// eigenbases are mutually unbiased.
const QUART_CLASSES: [[&str; 2]; 5] = [["ZI", "IZ"], ["XI", "IX"], ["YI", "IY"], ["XZ", "YX"], ["YZ", "ZX"]];

fn quart_bases() -> Vec<Vec<DVector<Complex64>>> {
    QUART_CLASSES
        .iter()
        .map(|[a, b]| {
            // A + 2B has the four simple eigenvalues ±1 ± 2.
            let m = pauli_string(a) + pauli_string(b) * c(2.0);
            let eig = m.symmetric_eigen();
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
            order
                .into_iter()
                .map(|i| {
                    let v = eig.eigenvectors.column(i).into_owned();
                    // Fix the phase so the first nonzero entry is real positive.
                    let lead = v.iter().find(|z| z.norm() > 1e-8).copied().unwrap();
                    v * (lead.conj() / c(lead.norm()))
                })
                .collect()
        })
        .collect()
}

fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|p| p * p <= d).all(|p| d % p != 0)
}

/// First `k` of a complete set of mutually unbiased bases in dimension `d`
/// (a prime or 4).
pub fn mub_set(d: usize, k: usize) -> Result<MeasurementSet, MeasurementError> {
    let bases = if is_prime(d) {
        prime_bases(d)
    } else if d == 4 {
        quart_bases()
    } else {
        return Err(MeasurementError::Unsupported(format!(
            "no mutually unbiased bases are built for d = {d} (only primes and 4)"
        )));
    };
    if k < 1 || k > d + 1 {
        return Err(MeasurementError::InvalidArgument(format!("k = {k} must lie in 1..={}", d + 1)));
    }
    MeasurementSet::new(bases[..k].iter().map(|b| basis_measurement(b)).collect())
}
