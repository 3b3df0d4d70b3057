//! Value types on the discrete image grid and the inner-product algebra.
//!
//! Images are stored row-major: the grid point in (0-based) row `r` and
//! column `c` lives at flat index `r * p_hor + c`. Paper-style 1-based
//! coordinates `(row, col)` map to `(row - 1) * p_hor + (col - 1)`.
//!
//! All inner products are the unweighted complex Euclidean product,
//! linear in the first argument and conjugate-linear in the second.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid dimensions `p_hor × p_ver`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawShape")]
pub struct GridShape {
    p_hor: usize,
    p_ver: usize,
}

#[derive(Deserialize)]
struct RawShape {
    p_hor: usize,
    p_ver: usize,
}

impl TryFrom<RawShape> for GridShape {
    type Error = Error;

    fn try_from(raw: RawShape) -> Result<Self> {
        GridShape::new(raw.p_hor, raw.p_ver)
    }
}

impl GridShape {
    pub fn new(p_hor: usize, p_ver: usize) -> Result<Self> {
        if p_hor == 0 || p_ver == 0 {
            return Err(Error::Invalid(format!(
                "grid dimensions must be positive, got {p_hor}x{p_ver}"
            )));
        }
        Ok(Self { p_hor, p_ver })
    }

    /// Number of columns.
    pub fn p_hor(&self) -> usize {
        self.p_hor
    }

    /// Number of rows.
    pub fn p_ver(&self) -> usize {
        self.p_ver
    }

    pub fn p_num(&self) -> usize {
        self.p_hor * self.p_ver
    }

    /// Flat index of the 0-based `(row, col)` grid point.
    pub fn flat_index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.p_ver && col < self.p_hor);
        row * self.p_hor + col
    }

    /// 0-based `(row, col)` of a flat index.
    pub fn coords(&self, flat: usize) -> (usize, usize) {
        (flat / self.p_hor, flat % self.p_hor)
    }
}

/// Common vector-space operations shared by images, measurements and joint
/// parameters. The iteration code is written against this trait.
pub trait Vector: Clone {
    /// `Σ a_k conj(b_k)`; errors if the two operands live on different spaces.
    fn inner(&self, other: &Self) -> Result<Complex64>;

    fn norm_sqr(&self) -> f64;

    fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `self += alpha * x`.
    fn axpy(&mut self, alpha: Complex64, x: &Self) -> Result<()>;

    fn scale(&mut self, alpha: Complex64);

    fn is_finite(&self) -> bool;
}

/// `⟨a, b⟩ = Σ a_k conj(b_k)`.
pub fn inner_product<V: Vector>(a: &V, b: &V) -> Result<Complex64> {
    a.inner(b)
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn axpy_slice(y: &mut [Complex64], alpha: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// A complex-valued function on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexImage {
    shape: GridShape,
    values: Vec<Complex64>,
}

impl ComplexImage {
    pub fn new(shape: GridShape, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != shape.p_num() {
            return Err(Error::dim(format!(
                "image on {}x{} grid needs {} values, got {}",
                shape.p_hor,
                shape.p_ver,
                shape.p_num(),
                values.len()
            )));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(shape: GridShape) -> Self {
        Self::constant(shape, Complex64::new(0.0, 0.0))
    }

    pub fn constant(shape: GridShape, value: Complex64) -> Self {
        Self {
            shape,
            values: vec![value; shape.p_num()],
        }
    }

    /// Builds an image from a function of the 0-based `(row, col)`.
    pub fn from_fn(shape: GridShape, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let values = (0..shape.p_num())
            .map(|n| {
                let (r, c) = shape.coords(n);
                f(r, c)
            })
            .collect();
        Self { shape, values }
    }

    /// Unit impulse at `flat`.
    pub fn impulse(shape: GridShape, flat: usize) -> Result<Self> {
        if flat >= shape.p_num() {
            return Err(Error::dim(format!("impulse index {flat} outside grid")));
        }
        let mut img = Self::zeros(shape);
        img.values[flat] = Complex64::new(1.0, 0.0);
        Ok(img)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::dim(format!(
                "image shapes differ: {}x{} vs {}x{}",
                self.shape.p_hor, self.shape.p_ver, other.shape.p_hor, other.shape.p_ver
            )));
        }
        Ok(())
    }

    /// `(a × b)(m) = a(m) b(m)`.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self {
            shape: self.shape,
            values,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            shape: self.shape,
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// `max_m |f(m)|`.
    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `(a × b)(m) = a(m) b(m)`.
pub fn pointwise_multiply(a: &ComplexImage, b: &ComplexImage) -> Result<ComplexImage> {
    a.pointwise_mul(b)
}

impl Vector for ComplexImage {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_shape(other)?;
        Ok(dot(&self.values, &other.values))
    }

    fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.values)
    }

    fn axpy(&mut self, alpha: Complex64, x: &Self) -> Result<()> {
        self.check_shape(x)?;
        axpy_slice(&mut self.values, alpha, &x.values);
        Ok(())
    }

    fn scale(&mut self, alpha: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= alpha);
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }
}

/// The measured subset of k-space, as strictly increasing flat indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KSpaceMask {
    shape: GridShape,
    indices: Vec<usize>,
}

impl KSpaceMask {
    pub fn new(shape: GridShape, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Invalid("mask must contain at least one index".into()));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(format!(
                "mask indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let last = *indices.last().unwrap();
        if last >= shape.p_num() {
            return Err(Error::Invalid(format!(
                "mask index {last} outside grid of {} points",
                shape.p_num()
            )));
        }
        Ok(Self { shape, indices })
    }

    pub fn full(shape: GridShape) -> Self {
        Self {
            shape,
            indices: (0..shape.p_num()).collect(),
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn p_proj(&self) -> usize {
        self.indices.len()
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.shape.p_num()
    }
}

/// An element of the data space `Y`, ordered like its mask's indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementVector {
    mask: Arc<KSpaceMask>,
    values: Vec<Complex64>,
}

impl MeasurementVector {
    pub fn new(mask: Arc<KSpaceMask>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mask.p_proj() {
            return Err(Error::dim(format!(
                "measurement needs {} values, got {}",
                mask.p_proj(),
                values.len()
            )));
        }
        Ok(Self { mask, values })
    }

    pub fn zeros(mask: Arc<KSpaceMask>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); mask.p_proj()];
        Self { mask, values }
    }

    pub fn mask(&self) -> &Arc<KSpaceMask> {
        &self.mask
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    pub(crate) fn check_mask(&self, mask: &KSpaceMask) -> Result<()> {
        if !same_mask(&self.mask, mask) {
            return Err(Error::dim("measurement lives on a different mask"));
        }
        Ok(())
    }
}

fn same_mask(a: &Arc<KSpaceMask>, b: &KSpaceMask) -> bool {
    std::ptr::eq(Arc::as_ptr(a), b) || **a == *b
}

impl Vector for MeasurementVector {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        other.check_mask(&self.mask)?;
        Ok(dot(&self.values, &other.values))
    }

    fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.values)
    }

    fn axpy(&mut self, alpha: Complex64, x: &Self) -> Result<()> {
        x.check_mask(&self.mask)?;
        axpy_slice(&mut self.values, alpha, &x.values);
        Ok(())
    }

    fn scale(&mut self, alpha: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= alpha);
    }

    fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }
}

/// Basis functions `ℬₙ` and per-receiver coefficient vectors `𝐛ⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SensitivityModel {
    basis: Vec<ComplexImage>,
    coefficients: Vec<Vec<Complex64>>,
}

impl SensitivityModel {
    pub fn new(basis: Vec<ComplexImage>, coefficients: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = basis.first() else {
            return Err(Error::Invalid("sensitivity basis is empty".into()));
        };
        if basis.iter().any(|b| b.shape() != first.shape()) {
            return Err(Error::dim("basis images must share one grid shape"));
        }
        if coefficients.is_empty() {
            return Err(Error::Invalid("at least one receiver is required".into()));
        }
        if let Some((j, c)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != basis.len())
        {
            return Err(Error::dim(format!(
                "receiver {j} has {} coefficients, basis has {}",
                c.len(),
                basis.len()
            )));
        }
        Ok(Self {
            basis,
            coefficients,
        })
    }

    pub fn shape(&self) -> GridShape {
        self.basis[0].shape()
    }

    pub fn basis(&self) -> &[ComplexImage] {
        &self.basis
    }

    pub fn coefficients(&self) -> &[Vec<Complex64>] {
        &self.coefficients
    }

    pub fn receiver_coefficients(&self, j: usize) -> Result<&[Complex64]> {
        self.coefficients
            .get(j)
            .map(Vec::as_slice)
            .ok_or(Error::ReceiverOutOfRange {
                index: j,
                count: self.r_num(),
            })
    }

    pub fn b_num(&self) -> usize {
        self.basis.len()
    }

    pub fn r_num(&self) -> usize {
        self.coefficients.len()
    }

    /// `𝒮ⱼ = Σₙ b_{j,n} ℬₙ`.
    pub fn materialize(&self, j: usize) -> Result<ComplexImage> {
        self.combine(self.receiver_coefficients(j)?)
    }

    /// `Σₙ cₙ ℬₙ` for an arbitrary coefficient vector.
    pub fn combine(&self, coefficients: &[Complex64]) -> Result<ComplexImage> {
        if coefficients.len() != self.b_num() {
            return Err(Error::dim(format!(
                "expected {} coefficients, got {}",
                self.b_num(),
                coefficients.len()
            )));
        }
        let mut out = ComplexImage::zeros(self.shape());
        for (c, b) in coefficients.iter().zip(&self.basis) {
            axpy_slice(&mut out.values, *c, &b.values);
        }
        Ok(out)
    }

    /// The same basis with a different coefficient set.
    pub fn with_coefficients(&self, coefficients: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::new(self.basis.clone(), coefficients)
    }
}

/// `𝒮ⱼ = Σₙ b_{j,n} ℬₙ` for receiver `j`.
pub fn materialize_sensitivity(model: &SensitivityModel, j: usize) -> Result<ComplexImage> {
    model.materialize(j)
}

/// A point `(𝒫, (𝐛ⱼ))` of the joint parameter space.
///
/// Its norm is the unweighted direct sum `‖𝒫‖² + Σⱼ ‖𝐛ⱼ‖²`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointParameter {
    pub image: ComplexImage,
    pub coefficients: Vec<Vec<Complex64>>,
}

impl JointParameter {
    pub fn new(image: ComplexImage, coefficients: Vec<Vec<Complex64>>) -> Self {
        Self {
            image,
            coefficients,
        }
    }

    pub fn zeros(shape: GridShape, r_num: usize, b_num: usize) -> Self {
        Self {
            image: ComplexImage::zeros(shape),
            coefficients: vec![vec![Complex64::new(0.0, 0.0); b_num]; r_num],
        }
    }

    /// A zero parameter with the same layout as `self`.
    pub fn zeros_like(&self) -> Self {
        Self {
            image: ComplexImage::zeros(self.image.shape()),
            coefficients: self
                .coefficients
                .iter()
                .map(|c| vec![Complex64::new(0.0, 0.0); c.len()])
                .collect(),
        }
    }

    pub fn r_num(&self) -> usize {
        self.coefficients.len()
    }

    pub fn b_num(&self) -> usize {
        self.coefficients.first().map_or(0, Vec::len)
    }

    fn check_layout(&self, other: &Self) -> Result<()> {
        if self.image.shape() != other.image.shape()
            || self.coefficients.len() != other.coefficients.len()
            || self
                .coefficients
                .iter()
                .zip(&other.coefficients)
                .any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::dim("joint parameters have different layouts"));
        }
        Ok(())
    }

    /// Flattens to `[image values..., b_{0,·}..., b_{1,·}...]`.
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut out = self.image.values().to_vec();
        for c in &self.coefficients {
            out.extend_from_slice(c);
        }
        out
    }

    /// Inverse of [`JointParameter::to_flat`] using `self` as the layout template.
    pub fn from_flat_like(&self, flat: &[Complex64]) -> Result<Self> {
        let expected = self.image.len() + self.coefficients.iter().map(Vec::len).sum::<usize>();
        if flat.len() != expected {
            return Err(Error::dim(format!(
                "flat joint parameter needs {expected} values, got {}",
                flat.len()
            )));
        }
        let (img, mut rest) = flat.split_at(self.image.len());
        let mut coefficients = Vec::with_capacity(self.coefficients.len());
        for c in &self.coefficients {
            let (head, tail) = rest.split_at(c.len());
            coefficients.push(head.to_vec());
            rest = tail;
        }
        Ok(Self {
            image: ComplexImage::new(self.image.shape(), img.to_vec())?,
            coefficients,
        })
    }
}

impl Vector for JointParameter {
    fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_layout(other)?;
        let mut acc = dot(self.image.values(), other.image.values());
        for (a, b) in self.coefficients.iter().zip(&other.coefficients) {
            acc += dot(a, b);
        }
        Ok(acc)
    }

    fn norm_sqr(&self) -> f64 {
        self.image.norm_sqr() + self.coefficients.iter().map(|c| norm_sqr(c)).sum::<f64>()
    }

    fn axpy(&mut self, alpha: Complex64, x: &Self) -> Result<()> {
        self.check_layout(x)?;
        axpy_slice(&mut self.image.values, alpha, &x.image.values);
        for (a, b) in self.coefficients.iter_mut().zip(&x.coefficients) {
            axpy_slice(a, alpha, b);
        }
        Ok(())
    }

    fn scale(&mut self, alpha: Complex64) {
        self.image.scale(alpha);
        for c in &mut self.coefficients {
            c.iter_mut().for_each(|z| *z *= alpha);
        }
    }

    fn is_finite(&self) -> bool {
        self.image.is_finite() && self.coefficients.iter().flatten().all(|z| z.is_finite())
    }
}
