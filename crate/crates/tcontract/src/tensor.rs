//! Dense strided tensor storage and dimension labels.
//!
//! A tensor is a flat buffer plus per-dimension lengths and signed element
//! strides. The default constructor produces *general column-major* layout:
//! stride 1 on the first dimension and colexicographically increasing strides
//! after that. Arbitrary strides (sub-views, permuted or gappy layouts) are
//! supported through [`DenseTensor::from_parts`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A single dimension label. Labels are compared by identity only; they are
/// usually ASCII letters (`Label::from('a')`) but any `u32` id works for
/// programmatic use.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl From<char> for Label {
    fn from(c: char) -> Self {
        Label(c as u32)
    }
}

impl Label {
    /// Renders printable labels as their character, others as `#id`.
    pub fn as_char(self) -> char {
        char::from_u32(self.0).filter(|c| c.is_ascii_graphic()).unwrap_or('#')
    }
}

impl std::fmt::Debug for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match char::from_u32(self.0).filter(|c| c.is_ascii_graphic()) {
            Some(c) => write!(f, "{c}"),
            None => write!(f, "#{}", self.0),
        }
    }
}

/// Ordered dimension labels for one tensor, one label per dimension.
/// Repeated labels within one tensor are rejected on construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LabelSet(Vec<Label>);

impl LabelSet {
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::RepeatedLabel(l.as_char()));
            }
        }
        Ok(LabelSet(labels))
    }

    /// Labels from a string of single characters, e.g. `"cfbd"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(s.chars().map(Label::from).collect())
    }

    /// Labels from explicit integer ids.
    pub fn from_ids(ids: &[u32]) -> Result<Self> {
        Self::new(ids.iter().map(|&i| Label(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn contains(&self, l: Label) -> bool {
        self.0.contains(&l)
    }

    pub fn position(&self, l: Label) -> Option<usize> {
        self.0.iter().position(|&x| x == l)
    }
}

impl std::str::FromStr for LabelSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Dense strided tensor over an owned buffer.
///
/// Invariant: every in-range multi-index maps to an in-bounds buffer offset.
/// Uniqueness of offsets (required when the tensor is a contraction output)
/// is checked at the contraction entry points, not on construction.
#[derive(Clone, Debug)]
pub struct DenseTensor<T> {
    lengths: Vec<usize>,
    strides: Vec<isize>,
    base: usize,
    data: Vec<T>,
}

impl<T> DenseTensor<T> {
    /// Tensor order (number of dimensions). Order 0 is a scalar.
    pub fn order(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn strides(&self) -> &[isize] {
        &self.strides
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Number of addressable logical elements (product of lengths).
    pub fn numel(&self) -> usize {
        self.lengths.iter().product()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Buffer offset of a multi-index: `base + sum(idx[k] * stride[k])`.
    pub fn element_offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order() {
            return Err(Error::OrderMismatch { labels: idx.len(), order: self.order() });
        }
        let mut off = self.base as isize;
        for (axis, (&i, (&len, &s))) in
            idx.iter().zip(self.lengths.iter().zip(self.strides.iter())).enumerate()
        {
            if i >= len {
                return Err(Error::IndexOutOfBounds { axis, index: i, len });
            }
            off += i as isize * s;
        }
        debug_assert!(off >= 0 && (off as usize) < self.data.len().max(1));
        Ok(off as usize)
    }

    pub fn get(&self, idx: &[usize]) -> Result<&T> {
        let off = self.element_offset(idx)?;
        Ok(&self.data[off])
    }

    pub fn set(&mut self, idx: &[usize], value: T) -> Result<()> {
        let off = self.element_offset(idx)?;
        self.data[off] = value;
        Ok(())
    }
}

/// Column-major strides for the given lengths: `stride[0] = 1`,
/// `stride[k] = prod(lengths[..k])`. Errors if the element count overflows.
pub fn column_major_strides(lengths: &[usize]) -> Result<Vec<isize>> {
    let mut strides = Vec::with_capacity(lengths.len());
    let mut acc: usize = 1;
    for (k, &len) in lengths.iter().enumerate() {
        strides.push(acc as isize);
        if k + 1 < lengths.len() {
            acc = acc.checked_mul(len).ok_or(Error::SizeOverflow)?;
        }
    }
    Ok(strides)
}

impl<T: Scalar> DenseTensor<T> {
    /// Zero-filled general column-major tensor.
    pub fn new_column_major(lengths: &[usize]) -> Result<Self> {
        let strides = column_major_strides(lengths)?;
        let count = lengths
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .ok_or(Error::SizeOverflow)?;
        Ok(DenseTensor { lengths: lengths.to_vec(), strides, base: 0, data: vec![T::ZERO; count] })
    }

    /// Tensor over an explicit buffer with explicit strides and base offset.
    /// Validates that every in-range index lands inside the buffer.
    pub fn from_parts(
        lengths: Vec<usize>,
        strides: Vec<isize>,
        base: usize,
        data: Vec<T>,
    ) -> Result<Self> {
        if lengths.len() != strides.len() {
            return Err(Error::OrderMismatch { labels: strides.len(), order: lengths.len() });
        }
        let numel: usize = lengths.iter().product();
        if numel > 0 {
            let mut lo = base as isize;
            let mut hi = base as isize;
            for (&len, &s) in lengths.iter().zip(&strides) {
                let span = (len as isize - 1) * s;
                if span >= 0 {
                    hi += span;
                } else {
                    lo += span;
                }
            }
            if lo < 0 || hi as usize >= data.len() {
                return Err(Error::BufferTooSmall {
                    need: (hi + 1).max(0) as usize,
                    have: data.len(),
                });
            }
        }
        Ok(DenseTensor { lengths, strides, base, data })
    }

    /// Column-major tensor with buffer element `i` set to `f(i)`.
    pub fn column_major_with(lengths: &[usize], mut f: impl FnMut(usize) -> T) -> Result<Self> {
        let mut t = Self::new_column_major(lengths)?;
        for (i, x) in t.data.iter_mut().enumerate() {
            *x = f(i);
        }
        Ok(t)
    }
}

/// Whether a layout addresses each logical element at a distinct offset.
///
/// Exact (enumeration) for small tensors; for larger ones a sufficient
/// stride-nesting condition is used and `false` may mean "not verifiable".
pub(crate) fn layout_is_injective(lengths: &[usize], strides: &[isize]) -> bool {
    let numel: usize = lengths.iter().product();
    if numel <= 1 {
        return true;
    }
    // Sufficient condition: sort dims of length > 1 by |stride|; each stride
    // must clear the combined span of all smaller-stride dims.
    let mut dims: Vec<(usize, usize)> = lengths
        .iter()
        .zip(strides)
        .filter(|(&l, _)| l > 1)
        .map(|(&l, &s)| (l, s.unsigned_abs()))
        .collect();
    dims.sort_by_key(|&(_, s)| s);
    let mut span: usize = 0;
    let mut nested = true;
    for &(len, s) in &dims {
        if s <= span {
            nested = false;
            break;
        }
        span += (len - 1) * s;
    }
    if nested {
        return true;
    }
    const EXACT_LIMIT: usize = 1 << 16;
    if numel > EXACT_LIMIT {
        return false;
    }
    let mut offsets = Vec::with_capacity(numel);
    let mut idx = vec![0usize; lengths.len()];
    loop {
        let off: isize = idx.iter().zip(strides).map(|(&i, &s)| i as isize * s).sum();
        offsets.push(off);
        let mut d = 0;
        loop {
            if d == lengths.len() {
                offsets.sort_unstable();
                return offsets.windows(2).all(|w| w[0] != w[1]);
            }
            idx[d] += 1;
            if idx[d] < lengths[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
