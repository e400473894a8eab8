//! Vandermonde MDS codes over a prime field.
//!
//! A code matrix with `r` rows and `n` columns turns the `n` messages of one
//! coding subspace into `r` transmissions. For the Vandermonde matrices built
//! here every `r x r` minor is nonzero, so any `n - r` known messages are
//! enough to recover the rest, and `n - r - 1` leave every unknown free.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeMatrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

/// Wire shape of a [`CodeMatrix`]: dimensions, modulus and row-major entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeMatrixDoc {
    pub r: usize,
    pub n: usize,
    pub p: u64,
    pub entries: Vec<u64>,
}

impl CodeMatrix {
    /// Entry `(i, j)` is `(j + 1)^i`: evaluation points `1..=n`, powers `0..r`.
    pub fn vandermonde(rows: usize, cols: usize, field: PrimeField) -> Result<Self> {
        if rows == 0 || rows > cols {
            return Err(Error::InvalidMatrix(format!(
                "need 1 <= r <= n, got r = {rows}, n = {cols}"
            )));
        }
        if cols as u64 >= field.modulus() {
            return Err(Error::NotEnoughPoints {
                needed: cols,
                modulus: field.modulus(),
            });
        }
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(field.pow(j as u64 + 1, i as u64));
            }
        }
        Ok(Self {
            field,
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from explicit rows; values are reduced modulo p.
    pub fn from_rows(field: PrimeField, rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if r == 0 || n == 0 || r > n {
            return Err(Error::InvalidMatrix(format!(
                "need 1 <= r <= n, got r = {r}, n = {n}"
            )));
        }
        if let Some(bad) = rows.iter().find(|row| row.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: bad.len(),
            });
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&v| v % field.modulus())
            .collect();
        Ok(Self {
            field,
            rows: r,
            cols: n,
            entries,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.field.element(self.raw(i, j))
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    fn raw(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.cols + j]
    }

    pub fn to_doc(&self) -> CodeMatrixDoc {
        CodeMatrixDoc {
            r: self.rows,
            n: self.cols,
            p: self.field.modulus(),
            entries: self.entries.clone(),
        }
    }

    pub fn from_doc(doc: &CodeMatrixDoc) -> Result<Self> {
        let field = PrimeField::new(doc.p)?;
        if doc.entries.len() != doc.r * doc.n {
            return Err(Error::LengthMismatch {
                expected: doc.r * doc.n,
                actual: doc.entries.len(),
            });
        }
        if let Some(&v) = doc.entries.iter().find(|&&v| v >= doc.p) {
            return Err(Error::Malformed(format!("entry {v} not below {}", doc.p)));
        }
        let rows: Vec<Vec<u64>> = doc
            .entries
            .chunks(doc.n.max(1))
            .map(<[u64]>::to_vec)
            .collect();
        Self::from_rows(field, &rows)
    }

    fn check_elements(&self, xs: &[FieldElement]) -> Result<()> {
        match xs.iter().find(|x| !self.field.contains(**x)) {
            Some(x) => Err(Error::IncompatibleModuli {
                left: self.field.modulus(),
                right: x.field().modulus(),
            }),
            None => Ok(()),
        }
    }

    /// `output[i] = sum_j entry(i, j) * messages[j]`.
    pub fn encode(&self, messages: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if messages.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                actual: messages.len(),
            });
        }
        self.check_elements(messages)?;
        let f = self.field;
        Ok((0..self.rows)
            .map(|i| {
                let acc = self
                    .row(i)
                    .iter()
                    .zip(messages)
                    .fold(0, |acc, (&a, x)| f.add(acc, f.mul(a, x.value())));
                f.element(acc)
            })
            .collect())
    }

    /// Recovers the full message vector from a codeword and a set of known
    /// columns. At least `n - r` columns must be known.
    pub fn decode(
        &self,
        codeword: &[FieldElement],
        known: &BTreeMap<usize, FieldElement>,
    ) -> Result<Vec<FieldElement>> {
        if codeword.len() != self.rows {
            return Err(Error::LengthMismatch {
                expected: self.rows,
                actual: codeword.len(),
            });
        }
        self.check_elements(codeword)?;
        let known_values: Vec<FieldElement> = known.values().copied().collect();
        self.check_elements(&known_values)?;
        if let Some(&col) = known.keys().find(|&&c| c >= self.cols) {
            return Err(Error::IndexOutOfRange {
                index: col,
                k: self.cols,
            });
        }
        let needed = self.cols - self.rows;
        if known.len() < needed {
            return Err(Error::InsufficientSideInformation {
                known: known.len(),
                needed,
            });
        }

        let f = self.field;
        let unknown: Vec<usize> = (0..self.cols).filter(|c| !known.contains_key(c)).collect();
        let u = unknown.len();

        // Augmented system [A_U | c - A_K x_K], one row per transmission.
        let mut system: Vec<Vec<u64>> = (0..self.rows)
            .map(|i| {
                let mut rhs = codeword[i].value();
                for (&j, x) in known {
                    rhs = f.sub(rhs, f.mul(self.raw(i, j), x.value()));
                }
                let mut row: Vec<u64> = unknown.iter().map(|&j| self.raw(i, j)).collect();
                row.push(rhs);
                row
            })
            .collect();

        let rank = row_reduce(f, &mut system, u);
        if rank < u {
            return Err(Error::Singular);
        }
        if system[rank..].iter().any(|row| row[u] != 0) {
            return Err(Error::InconsistentCodeword);
        }

        let mut out: Vec<FieldElement> = (0..self.cols)
            .map(|c| known.get(&c).copied().unwrap_or_else(|| f.zero()))
            .collect();
        for (k, &col) in unknown.iter().enumerate() {
            out[col] = f.element(system[k][u]);
        }
        Ok(out)
    }

    /// True iff every `r x r` column submatrix is invertible.
    pub fn is_mds(&self) -> bool {
        (0..self.cols).combinations(self.rows).all(|cols| {
            let square: Vec<Vec<u64>> = (0..self.rows)
                .map(|i| cols.iter().map(|&j| self.raw(i, j)).collect())
                .collect();
            determinant(self.field, square) != 0
        })
    }
}

/// Reduced row echelon form over the first `pivot_cols` columns, pivoting on
/// the first nonzero entry. Returns the rank.
fn row_reduce(f: PrimeField, m: &mut [Vec<u64>], pivot_cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..pivot_cols {
        let Some(pivot) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = f.inv(m[rank][col]).expect("pivot is nonzero");
        for v in m[rank].iter_mut() {
            *v = f.mul(*v, inv);
        }
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let factor = m[i][col];
                for c in 0..m[i].len() {
                    let delta = f.mul(factor, m[rank][c]);
                    m[i][c] = f.sub(m[i][c], delta);
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Determinant of a square matrix by elimination.
pub fn determinant(f: PrimeField, mut m: Vec<Vec<u64>>) -> u64 {
    let n = m.len();
    let mut det = 1;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&i| m[i][col] != 0) else {
            return 0;
        };
        if pivot != col {
            m.swap(pivot, col);
            det = f.sub(0, det);
        }
        det = f.mul(det, m[col][col]);
        let inv = f.inv(m[col][col]).expect("pivot is nonzero");
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest {
            let factor = f.mul(row[col], inv);
            if factor != 0 {
                for (x, &p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = f.sub(*x, f.mul(factor, p));
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};

    fn gf(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn elems(f: PrimeField, xs: &[u64]) -> Vec<FieldElement> {
        xs.iter().map(|&x| f.element(x)).collect()
    }

    fn values(xs: &[FieldElement]) -> Vec<u64> {
        xs.iter().map(FieldElement::value).collect()
    }

    // Independent oracle: Laplace expansion along the first row, in i128.
    fn cofactor_det(m: &[Vec<i128>]) -> i128 {
        if m.len() == 1 {
            return m[0][0];
        }
        (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn vandermonde_small() {
        let m = CodeMatrix::vandermonde(2, 5, gf(13)).unwrap();
        assert_eq!(m.row(0), &[1, 1, 1, 1, 1]);
        assert_eq!(m.row(1), &[1, 2, 3, 4, 5]);

        let m = CodeMatrix::vandermonde(1, 1, gf(7)).unwrap();
        assert_eq!(m.entries(), &[1]);

        let m = CodeMatrix::vandermonde(3, 3, gf(7)).unwrap();
        assert_eq!(m.entries(), &[1, 1, 1, 1, 2, 3, 1, 4, 2]);
        let ints: Vec<Vec<i128>> = (0..3)
            .map(|i| m.row(i).iter().map(|&v| v as i128).collect())
            .collect();
        let det = cofactor_det(&ints).rem_euclid(7);
        assert_ne!(det, 0);
        assert_eq!(
            determinant(
                gf(7),
                ints.iter()
                    .map(|r| r.iter().map(|&v| v as u64).collect())
                    .collect()
            ),
            det as u64
        );
    }

    #[test]
    fn vandermonde_needs_points() {
        assert_eq!(
            CodeMatrix::vandermonde(2, 7, gf(7)),
            Err(Error::NotEnoughPoints {
                needed: 7,
                modulus: 7
            })
        );
        assert!(CodeMatrix::vandermonde(3, 2, gf(7)).is_err());
        assert!(CodeMatrix::vandermonde(0, 2, gf(7)).is_err());
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let f = gf(65537);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..50 {
                let m: Vec<Vec<u64>> = (0..n)
                    .map(|_| (0..n).map(|_| rng.random_range(0..5)).collect())
                    .collect();
                let ints: Vec<Vec<i128>> = m
                    .iter()
                    .map(|r| r.iter().map(|&v| v as i128).collect())
                    .collect();
                let expected = cofactor_det(&ints).rem_euclid(65537) as u64;
                assert_eq!(determinant(f, m), expected);
            }
        }
    }

    #[test]
    fn encode_examples() {
        let f7 = gf(7);
        let m = CodeMatrix::vandermonde(2, 3, f7).unwrap();
        assert_eq!(values(&m.encode(&elems(f7, &[1, 2, 3])).unwrap()), [6, 0]);
        assert_eq!(values(&m.encode(&elems(f7, &[0, 0, 0])).unwrap()), [0, 0]);

        let f13 = gf(13);
        let m = CodeMatrix::vandermonde(2, 5, f13).unwrap();
        let x = elems(f13, &[3, 7, 2, 5, 11]);
        assert_eq!(values(&m.encode(&x).unwrap()), [2, 7]);

        assert_eq!(
            m.encode(&elems(f13, &[1, 2])),
            Err(Error::LengthMismatch {
                expected: 5,
                actual: 2
            })
        );
        assert!(matches!(
            m.encode(&elems(f7, &[1, 2, 3, 4, 5])),
            Err(Error::IncompatibleModuli { .. })
        ));
    }

    #[test]
    fn decode_worked_example() {
        // Columns are X1, X2, X4, X6, X8; side information X1, X4, X6.
        let f = gf(13);
        let m = CodeMatrix::vandermonde(2, 5, f).unwrap();
        let codeword = elems(f, &[2, 7]);
        let known: BTreeMap<usize, FieldElement> =
            [(0, f.element(3)), (2, f.element(2)), (3, f.element(5))].into();
        let out = m.decode(&codeword, &known).unwrap();
        assert_eq!(values(&out), [3, 7, 2, 5, 11]);
        assert_eq!(m.encode(&out).unwrap(), codeword);
    }

    #[test]
    fn decode_edge_cases() {
        let f = gf(65537);
        let m = CodeMatrix::vandermonde(4, 4, f).unwrap();
        let x = elems(f, &[9, 65536, 0, 1234]);
        let c = m.encode(&x).unwrap();
        assert_eq!(m.decode(&c, &BTreeMap::new()).unwrap(), x);

        let m = CodeMatrix::vandermonde(2, 4, f).unwrap();
        let c = m.encode(&x).unwrap();
        let all: BTreeMap<usize, FieldElement> = x.iter().copied().enumerate().collect();
        assert_eq!(m.decode(&c, &all).unwrap(), x);

        let one: BTreeMap<usize, FieldElement> = [(1, x[1])].into();
        assert_eq!(
            m.decode(&c, &one),
            Err(Error::InsufficientSideInformation {
                known: 1,
                needed: 2
            })
        );

        let bad: BTreeMap<usize, FieldElement> = [(0, x[0]), (9, x[1])].into();
        assert!(matches!(
            m.decode(&c, &bad),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn decode_detects_inconsistent_codeword() {
        let f = gf(13);
        let m = CodeMatrix::vandermonde(3, 4, f).unwrap();
        let x = elems(f, &[1, 2, 3, 4]);
        let mut c = m.encode(&x).unwrap();
        c[2] = c[2].add(f.one()).unwrap();
        let known: BTreeMap<usize, FieldElement> = [(0, x[0]), (1, x[1])].into();
        assert_eq!(m.decode(&c, &known), Err(Error::InconsistentCodeword));
    }

    #[test]
    fn singular_matrix_reported() {
        let f = gf(7);
        let m = CodeMatrix::from_rows(f, &[vec![1, 1], vec![1, 1]]).unwrap();
        let c = m.encode(&elems(f, &[1, 2])).unwrap();
        assert_eq!(m.decode(&c, &BTreeMap::new()), Err(Error::Singular));
    }

    #[test]
    fn mds_check() {
        assert!(CodeMatrix::vandermonde(2, 5, gf(13)).unwrap().is_mds());
        let f = gf(7);
        assert!(!CodeMatrix::from_rows(f, &[vec![1, 1], vec![1, 1]])
            .unwrap()
            .is_mds());
        assert!(CodeMatrix::from_rows(f, &[vec![1, 0], vec![0, 1]])
            .unwrap()
            .is_mds());
        // A 2x3 matrix with one dependent column pair.
        assert!(!CodeMatrix::from_rows(f, &[vec![1, 2, 1], vec![1, 2, 3]])
            .unwrap()
            .is_mds());
    }

    #[test]
    fn two_by_two_minors_are_point_differences() {
        let f = gf(13);
        let m = CodeMatrix::vandermonde(2, 5, f).unwrap();
        for (a, b) in (0..5).tuple_combinations() {
            let minor = vec![
                vec![m.raw(0, a), m.raw(0, b)],
                vec![m.raw(1, a), m.raw(1, b)],
            ];
            assert_eq!(determinant(f, minor), f.sub(b as u64 + 1, a as u64 + 1));
        }
    }

    #[test]
    fn round_trip_randomized() {
        let f = gf(65537);
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let n = rng.random_range(1..=10);
            let r = rng.random_range(1..=n);
            let m = CodeMatrix::vandermonde(r, n, f).unwrap();
            let x: Vec<FieldElement> = (0..n)
                .map(|_| f.element(rng.random_range(0..65537)))
                .collect();
            let c = m.encode(&x).unwrap();
            let known: BTreeMap<usize, FieldElement> = sample(&mut rng, n, n - r)
                .into_iter()
                .map(|j| (j, x[j]))
                .collect();
            assert_eq!(m.decode(&c, &known).unwrap(), x);
        }
    }

    #[test]
    fn doc_round_trip() {
        let m = CodeMatrix::vandermonde(3, 5, gf(13)).unwrap();
        assert_eq!(CodeMatrix::from_doc(&m.to_doc()).unwrap(), m);
        let mut doc = m.to_doc();
        doc.entries[0] = 13;
        assert!(CodeMatrix::from_doc(&doc).is_err());
    }
}
