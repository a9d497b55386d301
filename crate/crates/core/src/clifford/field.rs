use std::sync::Arc;

use num_complex::Complex64;

use super::context::CliffordContext;
use super::element::Element;
use crate::error::{Error, Result};

/// An `n`-tuple of algebra elements, one per generator direction.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<Element>,
}

impl VectorField {
    pub fn new(components: Vec<Element>) -> Result<Self> {
        let first = components.first().ok_or(Error::FieldArity {
            expected: 1,
            got: 0,
        })?;
        let n = first.n();
        if components.len() != n {
            return Err(Error::FieldArity {
                expected: n,
                got: components.len(),
            });
        }
        for c in &components {
            first.same_algebra(c)?;
        }
        Ok(VectorField { components })
    }

    pub(crate) fn from_components_unchecked(components: Vec<Element>) -> Self {
        VectorField { components }
    }

    pub fn zero(ctx: &Arc<CliffordContext>) -> Self {
        VectorField {
            components: (0..ctx.n()).map(|_| Element::zero(ctx)).collect(),
        }
    }

    pub fn ctx(&self) -> &Arc<CliffordContext> {
        self.components[0].ctx()
    }

    pub fn components(&self) -> &[Element] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Element {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Element> {
        self.components
    }

    pub fn map(&self, f: impl Fn(&Element) -> Element) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&Element) -> Result<Element>) -> Result<VectorField> {
        Ok(VectorField {
            components: self.components.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn zip_map(&self, other: &VectorField, f: impl Fn(&Element, &Element) -> Element) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// `sum_i tau(A_i^* B_i)`
    pub fn inner(&self, other: &VectorField) -> Complex64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn adjoint(&self) -> VectorField {
        self.map(Element::adjoint)
    }

    pub fn scale_re(&self, s: f64) -> VectorField {
        self.map(|a| a.scale_re(s))
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn dist(&self, other: &VectorField) -> f64 {
        self.sub(other).norm()
    }
}
