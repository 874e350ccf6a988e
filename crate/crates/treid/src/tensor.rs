//! Dense 3-order tensors with mode unfoldings, mode products, and per-person
//! slicing.
//!
//! A [`Tensor3`] holds feature parts on mode 1, feature values on mode 2, and
//! persons on mode 3. Storage is a flat `f64` buffer in a fixed canonical
//! layout: element `(i, j, k)` lives at index `i + j·m1 + k·m1·m2`. Unfolding
//! a mode yields a matrix whose rows index that mode and whose columns run
//! over the remaining modes with the lower remaining mode varying fastest.
//! Mode products are only defined on modes 1 and 2; the persons mode is never
//! reduced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Extents of the three modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub parts: usize,
    pub features: usize,
    pub persons: usize,
}

impl Dims {
    pub fn new(parts: usize, features: usize, persons: usize) -> Self {
        Dims {
            parts,
            features,
            persons,
        }
    }

    pub fn len(&self) -> usize {
        self.parts * self.features * self.persons
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Extent of one mode.
    pub fn dim(&self, mode: Mode) -> usize {
        match mode {
            Mode::Parts => self.parts,
            Mode::Features => self.features,
            Mode::Persons => self.persons,
        }
    }

    /// Extents of the two other modes, lower mode first.
    fn others(&self, mode: Mode) -> (usize, usize) {
        match mode {
            Mode::Parts => (self.features, self.persons),
            Mode::Features => (self.parts, self.persons),
            Mode::Persons => (self.parts, self.features),
        }
    }

    fn with_dim(&self, mode: Mode, value: usize) -> Dims {
        let mut d = *self;
        match mode {
            Mode::Parts => d.parts = value,
            Mode::Features => d.features = value,
            Mode::Persons => d.persons = value,
        }
        d
    }
}

/// One of the three tensor modes. `Parts` and `Features` may be projected;
/// `Persons` always keeps its extent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Parts,
    Features,
    Persons,
}

/// Dense 3-order tensor of finite `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    dims: Dims,
    data: Vec<f64>,
}

impl Tensor3 {
    /// Builds a tensor from a flat buffer in canonical layout.
    pub fn from_vec(dims: Dims, data: Vec<f64>) -> Result<Self> {
        if dims.parts == 0 || dims.features == 0 || dims.persons == 0 {
            return Err(Error::Shape(format!(
                "tensor dims must all be at least 1, got {}x{}x{}",
                dims.parts, dims.features, dims.persons
            )));
        }
        if data.len() != dims.len() {
            return Err(Error::Shape(format!(
                "tensor data length {} does not match dims {}x{}x{}",
                data.len(),
                dims.parts,
                dims.features,
                dims.persons
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tensor data".into()));
        }
        Ok(Tensor3 { dims, data })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        Self::from_vec(dims, vec![0.0; dims.len()])
    }

    /// Builds a tensor by evaluating `f(i, j, k)` at every coordinate.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; dims.len()];
        for k in 0..dims.persons {
            for j in 0..dims.features {
                for i in 0..dims.parts {
                    data[i + j * dims.parts + k * dims.parts * dims.features] = f(i, j, k);
                }
            }
        }
        Self::from_vec(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.parts && j < self.dims.features && k < self.dims.persons);
        i + j * self.dims.parts + k * self.dims.parts * self.dims.features
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    /// Mode-n unfolding. Rows index the chosen mode; columns run over the
    /// remaining modes, lower mode fastest.
    pub fn unfold(&self, mode: Mode) -> Matrix {
        let Dims {
            parts: m1,
            features: m2,
            persons: m3,
        } = self.dims;
        let rows = self.dims.dim(mode);
        let (lo, hi) = self.dims.others(mode);
        let mut out = Matrix::zeros(rows, lo * hi);
        for k in 0..m3 {
            for j in 0..m2 {
                for i in 0..m1 {
                    let v = self.at(i, j, k);
                    let (r, c) = match mode {
                        Mode::Parts => (i, j + k * m2),
                        Mode::Features => (j, i + k * m1),
                        Mode::Persons => (k, i + j * m1),
                    };
                    out[(r, c)] = v;
                }
            }
        }
        out
    }

    /// Exact inverse of [`Tensor3::unfold`]: rebuilds the tensor from an
    /// unfolded matrix. Bitwise, since values are only moved.
    pub fn fold(m: &Matrix, mode: Mode, dims: Dims) -> Result<Self> {
        let (lo, hi) = dims.others(mode);
        if m.nrows() != dims.dim(mode) || m.ncols() != lo * hi {
            return Err(Error::Shape(format!(
                "cannot fold a {}x{} matrix into dims {}x{}x{} on mode {:?}",
                m.nrows(),
                m.ncols(),
                dims.parts,
                dims.features,
                dims.persons,
                mode
            )));
        }
        let mut data = vec![0.0; dims.len()];
        for k in 0..dims.persons {
            for j in 0..dims.features {
                for i in 0..dims.parts {
                    let (r, c) = match mode {
                        Mode::Parts => (i, j + k * dims.features),
                        Mode::Features => (j, i + k * dims.parts),
                        Mode::Persons => (k, i + j * dims.parts),
                    };
                    data[i + j * dims.parts + k * dims.parts * dims.features] = m[(r, c)];
                }
            }
        }
        Self::from_vec(dims, data)
    }

    /// Mode product with a projection matrix `u` whose rows match the mode's
    /// extent: the result satisfies `unfold(result, mode) = uᵀ · unfold(self, mode)`.
    /// Only the parts and features modes may be projected.
    pub fn mode_product(&self, u: &Matrix, mode: Mode) -> Result<Self> {
        if mode == Mode::Persons {
            return Err(Error::Shape(
                "the persons mode keeps its extent and cannot be projected".into(),
            ));
        }
        if u.nrows() != self.dims.dim(mode) || u.ncols() == 0 {
            return Err(Error::Shape(format!(
                "projection is {}x{} but mode {:?} has extent {}",
                u.nrows(),
                u.ncols(),
                mode,
                self.dims.dim(mode)
            )));
        }
        let unfolded = self.unfold(mode);
        let projected = u.tr_mul(&unfolded);
        Self::fold(&projected, mode, self.dims.with_dim(mode, u.ncols()))
    }

    /// The parts × features matrix of one person.
    pub fn person_slice(&self, k: usize) -> Result<Matrix> {
        if k >= self.dims.persons {
            return Err(Error::Shape(format!(
                "person index {k} out of range for {} persons",
                self.dims.persons
            )));
        }
        Ok(Matrix::from_fn(
            self.dims.parts,
            self.dims.features,
            |i, j| self.at(i, j, k),
        ))
    }

    /// All person slices in mode-3 order.
    pub fn person_slices(&self) -> Vec<Matrix> {
        (0..self.dims.persons)
            .map(|k| self.person_slice(k).expect("index in range"))
            .collect()
    }
}

/// Column-major flattening of a matrix.
pub fn vectorize(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}
