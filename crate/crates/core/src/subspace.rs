//! Spans of equally-shaped matrices, their intersections and
//! form-orthogonal complements.

use crate::error::{Error, Result};
use crate::linalg::{inverse, least_squares, nullspace, rank, rref, RANK_CUTOFF};
use crate::mat::Mat;
use crate::scalar::{Mode, Scalar};

/// Relative residual under which a float vector counts as lying in a span.
pub const CONTAINMENT_TOL: f64 = 1e-8;

/// A linear span of `rows × cols` matrices. The basis is always kept in
/// reduced row echelon form over the row-major vectorization, so two equal
/// exact spans have literally equal bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<T> {
    rows: usize,
    cols: usize,
    basis: Vec<Mat<T>>,
    pivots: Vec<usize>,
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Subspace {
            rows,
            cols,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Reduces `vectors` to an independent echelon basis of their span.
    pub fn span(rows: usize, cols: usize, vectors: &[Mat<T>]) -> Result<Self> {
        Self::span_with_cutoff(rows, cols, vectors, RANK_CUTOFF)
    }

    pub fn span_with_cutoff(
        rows: usize,
        cols: usize,
        vectors: &[Mat<T>],
        cutoff: f64,
    ) -> Result<Self> {
        if let Some(bad) = vectors.iter().find(|v| v.shape() != (rows, cols)) {
            return Err(Error::Shape(format!(
                "expected {rows}x{cols} matrices, got {:?}",
                bad.shape()
            )));
        }
        if vectors.is_empty() {
            return Ok(Self::zero(rows, cols));
        }
        let n = rows * cols;
        let mut stacked = Mat::from_fn(vectors.len(), n, |i, j| vectors[i].data()[j].clone());
        let pivots = rref(&mut stacked, cutoff);
        let basis = (0..pivots.len())
            .map(|i| Mat::from_vec(rows, cols, stacked.row(i).to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Subspace {
            rows,
            cols,
            basis,
            pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn ambient_dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn basis(&self) -> &[Mat<T>] {
        &self.basis
    }

    fn check_shape(&self, x: &Mat<T>) -> Result<()> {
        if x.shape() != (self.rows, self.cols) {
            return Err(Error::Shape(format!(
                "{:?} against subspace of {}x{} matrices",
                x.shape(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }

    fn check_ambient(&self, other: &Subspace<T>) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Ambient {
                left: self.ambient_dim(),
                right: other.ambient_dim(),
            });
        }
        Ok(())
    }

    pub fn combine(&self, coeffs: &[T]) -> Mat<T> {
        self.basis
            .iter()
            .zip(coeffs)
            .fold(Mat::zeros(self.rows, self.cols), |acc, (b, c)| &acc + &b.scale(c))
    }

    /// Coordinates read off at the echelon pivots, together with the norm of
    /// what is left over.
    pub fn coords_with_residual(&self, x: &Mat<T>) -> Result<(Vec<T>, f64)> {
        self.check_shape(x)?;
        let c: Vec<T> = self.pivots.iter().map(|&p| x.data()[p].clone()).collect();
        let rest = x - &self.combine(&c);
        Ok((c, rest.frobenius()))
    }

    pub fn coords(&self, x: &Mat<T>) -> Result<Vec<T>> {
        let (c, res) = self.coords_with_residual(x)?;
        if !self.accepts_residual(res, x.frobenius()) {
            return Err(Error::NotContained(format!("matrix (residual {res:e})")));
        }
        Ok(c)
    }

    fn accepts_residual(&self, res: f64, scale: f64) -> bool {
        match T::MODE {
            Mode::Exact => res == 0.0,
            Mode::Float => res <= CONTAINMENT_TOL * scale.max(1.0),
        }
    }

    /// Distance-like residual of `x` from the span (zero iff contained).
    pub fn residual(&self, x: &Mat<T>) -> Result<f64> {
        Ok(self.coords_with_residual(x)?.1)
    }

    pub fn contains(&self, x: &Mat<T>) -> bool {
        match self.coords_with_residual(x) {
            Ok((_, res)) => self.accepts_residual(res, x.frobenius()),
            Err(_) => false,
        }
    }

    pub fn contains_subspace(&self, other: &Subspace<T>) -> bool {
        self.shape() == other.shape() && other.basis.iter().all(|b| self.contains(b))
    }

    pub fn same_span(&self, other: &Subspace<T>) -> bool {
        match T::MODE {
            Mode::Exact => self == other,
            Mode::Float => {
                self.dim() == other.dim()
                    && self.contains_subspace(other)
                    && other.contains_subspace(self)
            }
        }
    }

    pub fn sum(&self, other: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(other)?;
        let all: Vec<Mat<T>> = self.basis.iter().chain(&other.basis).cloned().collect();
        Subspace::span(self.rows, self.cols, &all)
    }

    /// `self ∩ other` from the kernel of `[A | −B]` acting on stacked coefficients.
    pub fn intersect(&self, other: &Subspace<T>) -> Result<Subspace<T>> {
        self.check_ambient(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.rows, self.cols));
        }
        let (a, b) = (self.dim(), other.dim());
        let n = self.ambient_dim();
        let system = Mat::from_fn(n, a + b, |i, j| {
            if j < a {
                self.basis[j].data()[i].clone()
            } else {
                -other.basis[j - a].data()[i].clone()
            }
        });
        let kernel = nullspace(&system, RANK_CUTOFF);
        let vectors: Vec<Mat<T>> = kernel.iter().map(|k| self.combine(&k[..a])).collect();
        Subspace::span(self.rows, self.cols, &vectors)
    }

    /// True when the sum of the given spans is direct.
    pub fn is_direct(parts: &[&Subspace<T>]) -> bool {
        let Some(first) = parts.first() else {
            return true;
        };
        let all: Vec<Vec<T>> = parts
            .iter()
            .flat_map(|s| s.basis.iter().map(Mat::vectorize))
            .collect();
        if all.is_empty() {
            return true;
        }
        let m = Mat::from_fn(all.len(), first.ambient_dim(), |i, j| all[i][j].clone());
        rank(&m, RANK_CUTOFF) == all.len()
    }

    /// Unique component of `x` in `onto` along `along`.
    pub fn project(x: &Mat<T>, onto: &Subspace<T>, along: &Subspace<T>) -> Result<Mat<T>> {
        onto.check_ambient(along)?;
        onto.check_shape(x)?;
        if !Self::is_direct(&[onto, along]) {
            let inter = onto.intersect(along)?.dim();
            return Err(Error::NotDirect(inter.max(1)));
        }
        let cols: Vec<Vec<T>> = onto
            .basis
            .iter()
            .chain(&along.basis)
            .map(Mat::vectorize)
            .collect();
        if cols.is_empty() {
            return if x.is_zero() {
                Ok(x.clone())
            } else {
                Err(Error::NotContained("matrix outside the zero sum".into()))
            };
        }
        let a = Mat::from_columns(&cols)?;
        let (c, res) = least_squares(&a, x.data())?;
        if !onto.accepts_residual(res, x.frobenius()) {
            return Err(Error::NotContained(format!(
                "matrix outside onto ⊕ along (residual {res:e})"
            )));
        }
        Ok(onto.combine(&c[..onto.dim()]))
    }

    pub fn to_f64(&self) -> Subspace<f64> {
        let b: Vec<Mat<f64>> = self.basis.iter().map(Mat::to_f64).collect();
        Subspace::span(self.rows, self.cols, &b).expect("shape preserved")
    }
}

/// A symmetric bilinear form given by its Gram matrix on an explicit basis.
#[derive(Clone, Debug)]
pub struct GramForm<T> {
    basis: Vec<Mat<T>>,
    gram: Mat<T>,
    span: Subspace<T>,
    /// Converts echelon coordinates of `span` into coordinates in `basis`.
    to_basis: Mat<T>,
}

impl<T: Scalar> GramForm<T> {
    pub fn new(basis: Vec<Mat<T>>, gram: Mat<T>) -> Result<Self> {
        let k = basis.len();
        if gram.shape() != (k, k) {
            return Err(Error::Shape(format!(
                "{k} basis elements but a {:?} Gram matrix",
                gram.shape()
            )));
        }
        let sym = (&gram - &gram.transpose()).max_abs();
        if sym > 1e-9 * gram.max_abs().max(1.0) || (T::MODE == Mode::Exact && sym != 0.0) {
            return Err(Error::Input(format!("Gram matrix is not symmetric ({sym:e})")));
        }
        let (rows, cols) = basis.first().map_or((0, 0), Mat::shape);
        let span = Subspace::span(rows, cols, &basis)?;
        if span.dim() != k {
            return Err(Error::Input("form basis is linearly dependent".into()));
        }
        // row i of `m` = echelon coordinates of basis_i
        let m = Mat::from_rows(
            basis
                .iter()
                .map(|b| span.coords(b))
                .collect::<Result<Vec<_>>>()?,
        )
        .unwrap_or_else(|_| Mat::zeros(0, 0));
        let to_basis = if k == 0 { Mat::zeros(0, 0) } else { inverse(&m)? };
        Ok(GramForm {
            basis,
            gram,
            span,
            to_basis,
        })
    }

    pub fn basis(&self) -> &[Mat<T>] {
        &self.basis
    }

    pub fn gram(&self) -> &Mat<T> {
        &self.gram
    }

    pub fn span(&self) -> &Subspace<T> {
        &self.span
    }

    /// Coordinates of `x` in the form's basis.
    pub fn coords(&self, x: &Mat<T>) -> Result<Vec<T>> {
        let c = self.span.coords(x)?;
        Ok(self.to_basis.transpose().apply(&c))
    }

    pub fn eval(&self, x: &Mat<T>, y: &Mat<T>) -> Result<T> {
        let cx = self.coords(x)?;
        let cy = self.coords(y)?;
        Ok(crate::mat::dot(&cx, &self.gram.apply(&cy)))
    }

    /// Gram matrix of the form restricted to the given elements.
    pub fn restrict(&self, elems: &[Mat<T>]) -> Result<Mat<T>> {
        let coords = elems
            .iter()
            .map(|e| self.coords(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(Mat::from_fn(elems.len(), elems.len(), |i, j| {
            crate::mat::dot(&coords[i], &self.gram.apply(&coords[j]))
        }))
    }
}

/// Result of a form-orthogonal complement.
#[derive(Clone, Debug)]
pub struct Complement<T> {
    pub space: Subspace<T>,
    /// Whether the form restricted to the complemented subspace is nondegenerate.
    pub nondegenerate: bool,
}

/// `{X ∈ within : form(X, Y) = 0 ∀ Y ∈ sub}`.
pub fn orth_complement<T: Scalar>(
    sub: &Subspace<T>,
    within: &Subspace<T>,
    form: &GramForm<T>,
) -> Result<Complement<T>> {
    sub.check_ambient(within)?;
    if !within.contains_subspace(sub) {
        return Err(Error::NotContained("subspace".into()));
    }
    if !form.span().contains_subspace(within) {
        return Err(Error::NotContained("form domain".into()));
    }
    let s_coords = sub
        .basis()
        .iter()
        .map(|b| form.coords(b))
        .collect::<Result<Vec<_>>>()?;
    let w_coords = within
        .basis()
        .iter()
        .map(|b| form.coords(b))
        .collect::<Result<Vec<_>>>()?;
    let g = form.gram();
    let k = sub.dim();
    let w = within.dim();
    let constraints = Mat::from_fn(k, w, |i, l| crate::mat::dot(&s_coords[i], &g.apply(&w_coords[l])));
    let kernel = if k == 0 {
        (0..w)
            .map(|l| (0..w).map(|m| if m == l { T::one() } else { T::zero() }).collect())
            .collect()
    } else {
        nullspace(&constraints, RANK_CUTOFF)
    };
    let vectors: Vec<Mat<T>> = kernel.iter().map(|c| within.combine(c)).collect();
    let (rows, cols) = within.shape();
    let space = Subspace::span(rows, cols, &vectors)?;
    let restricted = Mat::from_fn(k, k, |i, j| crate::mat::dot(&s_coords[i], &g.apply(&s_coords[j])));
    let nondegenerate = k == 0 || rank(&restricted, RANK_CUTOFF) == k;
    Ok(Complement {
        space,
        nondegenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn e(n: usize, i: usize, j: usize) -> Mat<Exact> {
        Mat::unit(n, i, j)
    }

    fn skew(n: usize, i: usize, j: usize) -> Mat<Exact> {
        &e(n, i, j) - &e(n, j, i)
    }

    #[test]
    fn span_reduce_examples() {
        let m = skew(3, 0, 1);
        let s = Subspace::span(3, 3, &[m.clone(), m.scale(&Exact::from_i64(2))]).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(Subspace::<Exact>::span(3, 3, &[]).unwrap().dim(), 0);
        let so3 = Subspace::span(3, 3, &[skew(3, 0, 1), skew(3, 0, 2), skew(3, 1, 2)]).unwrap();
        assert_eq!(so3.dim(), 3);
        assert!(Subspace::span(3, 3, &[Mat::<Exact>::zeros(2, 2)]).is_err());
    }

    #[test]
    fn intersect_examples() {
        let a = Subspace::span(3, 3, &[skew(3, 0, 1), e(3, 2, 2)]).unwrap();
        assert_eq!(a.intersect(&a).unwrap(), a);
        let x = Subspace::span(2, 2, &[e(2, 0, 1)]).unwrap();
        let y = Subspace::span(2, 2, &[e(2, 1, 0)]).unwrap();
        assert_eq!(x.intersect(&y).unwrap().dim(), 0);
        let z = Subspace::span(3, 3, &[e(3, 0, 0)]).unwrap();
        assert!(x.intersect(&z).is_err());
    }

    #[test]
    fn complement_of_zero_is_everything() {
        let w = Subspace::span(2, 2, &[e(2, 0, 0), e(2, 1, 1)]).unwrap();
        let form = GramForm::new(w.basis().to_vec(), Mat::identity(2)).unwrap();
        let c = orth_complement(&Subspace::zero(2, 2), &w, &form).unwrap();
        assert!(c.space.same_span(&w));
        let c = orth_complement(&w, &w, &form).unwrap();
        assert_eq!(c.space.dim(), 0);
        assert!(c.nondegenerate);
    }

    #[test]
    fn degenerate_complement_is_flagged() {
        let w = Subspace::span(2, 2, &[e(2, 0, 0), e(2, 1, 1)]).unwrap();
        let gram = Mat::<i64>::from_rows(vec![vec![0, 1], vec![1, 0]]).unwrap().cast();
        let form = GramForm::new(w.basis().to_vec(), gram).unwrap();
        let null = Subspace::span(2, 2, &[e(2, 0, 0)]).unwrap();
        let c = orth_complement(&null, &w, &form).unwrap();
        assert!(!c.nondegenerate);
        assert!(c.space.same_span(&null));
    }

    #[test]
    fn project_factors() {
        let a = Subspace::span(2, 2, &[e(2, 0, 0)]).unwrap();
        let b = Subspace::span(2, 2, &[&e(2, 0, 0) + &e(2, 1, 1)]).unwrap();
        let x = &e(2, 0, 0).scale(&Exact::from_i64(3)) + &e(2, 1, 1);
        let pa = Subspace::project(&x, &a, &b).unwrap();
        let pb = Subspace::project(&x, &b, &a).unwrap();
        assert_eq!(pa, e(2, 0, 0).scale(&Exact::from_i64(2)));
        assert_eq!(&pa + &pb, x);
        assert!(Subspace::project(&e(2, 0, 1), &a, &b).is_err());
        assert!(matches!(
            Subspace::project(&x, &a, &a),
            Err(Error::NotDirect(_))
        ));
    }
}
