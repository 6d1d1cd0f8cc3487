//! Models the engine can compute on, and pairs over them.

use serde::{Deserialize, Serialize};

use crate::divisor::{Boundary, RationalDivisor};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::surface::SurfaceModel;
use crate::toric::{canonical_divisor, ToricVariety};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    Surface(SurfaceModel),
    Toric(ToricVariety),
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Surface(_) => 2,
            Model::Toric(x) => x.dim(),
        }
    }

    pub fn as_toric(&self) -> Option<&ToricVariety> {
        match self {
            Model::Toric(x) => Some(x),
            Model::Surface(_) => None,
        }
    }

    pub fn as_surface(&self) -> Option<&SurfaceModel> {
        match self {
            Model::Surface(s) => Some(s),
            Model::Toric(_) => None,
        }
    }

    pub fn has_component(&self, id: &str) -> bool {
        match self {
            Model::Surface(s) => s.index(id).is_ok(),
            Model::Toric(x) => x.has_component(id),
        }
    }

    pub fn check_divisor(&self, d: &RationalDivisor) -> Result<()> {
        match d.iter().find(|(id, _)| !self.has_component(id)) {
            Some((id, _)) => Err(Error::UnknownComponent(id.to_string())),
            None => Ok(()),
        }
    }

    pub fn canonical(&self) -> Result<RationalDivisor> {
        match self {
            Model::Surface(s) => s
                .canonical()
                .cloned()
                .ok_or_else(|| Error::Precondition("surface model declares no canonical class".into())),
            Model::Toric(x) => Ok(canonical_divisor(x)),
        }
    }

    pub fn generator_count(&self) -> Result<usize> {
        match self {
            Model::Surface(s) => Ok(s.mori_generators().len()),
            Model::Toric(x) => {
                x.require_complete()?;
                Ok(x.walls().len())
            }
        }
    }

    /// `D . R` for every Mori generator `R`, in generator order.
    pub fn generator_values(&self, d: &RationalDivisor) -> Result<Vec<Rational>> {
        match self {
            Model::Surface(s) => s.generator_values(d),
            Model::Toric(x) => {
                x.require_complete()?;
                x.wall_values(d)
            }
        }
    }

    pub fn generator_label(&self, i: usize) -> String {
        match self {
            Model::Surface(s) => s.generator_label(i),
            Model::Toric(x) => wall_label(x, i),
        }
    }

    /// First generator with `D . R < 0`.
    pub fn nef_witness(&self, d: &RationalDivisor) -> Result<Option<(usize, Rational)>> {
        Ok(self
            .generator_values(d)?
            .into_iter()
            .enumerate()
            .find(|(_, v)| v.is_negative()))
    }

    pub fn is_nef(&self, d: &RationalDivisor) -> Result<bool> {
        Ok(self.nef_witness(d)?.is_none())
    }

    pub fn require_nef(&self, name: &str, d: &RationalDivisor) -> Result<()> {
        match self.nef_witness(d)? {
            None => Ok(()),
            Some((i, v)) => Err(Error::NotNef {
                divisor: name.to_string(),
                witness: self.generator_label(i),
                value: v,
            }),
        }
    }

    /// Pullback of `d` from `self` to `w`, where `w` is `self` or (toric) a
    /// refinement of it.
    pub fn pullback_to(&self, d: &RationalDivisor, w: &Model) -> Result<RationalDivisor> {
        if self == w {
            return Ok(d.clone());
        }
        match (self, w) {
            (Model::Toric(x), Model::Toric(v)) if v.refines(x) => x.pullback_to(d, v),
            _ => Err(Error::ModelMismatch(
                "decomposition model is not a modification of the base model".into(),
            )),
        }
    }
}

/// Label of a toric wall curve: `V(` ray ids of the wall `)`.
pub fn wall_label(x: &ToricVariety, i: usize) -> String {
    let ids: Vec<String> = x.walls()[i].wall.iter().map(|&r| x.ray_id(r)).collect();
    format!("V({})", ids.join(","))
}

/// A model with a boundary whose components are prime divisors of the model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pair {
    pub model: Model,
    pub boundary: Boundary,
}

impl Pair {
    pub fn new(model: Model, boundary: Boundary) -> Result<Self> {
        model.check_divisor(boundary.divisor())?;
        if let Model::Surface(s) = &model {
            if let Some((id, _)) = boundary
                .divisor()
                .iter()
                .find(|(id, _)| !s.is_prime_curve(id))
            {
                return Err(Error::Precondition(format!(
                    "boundary component `{id}` is not a prime curve"
                )));
            }
        }
        Ok(Pair { model, boundary })
    }

    pub fn toric(x: ToricVariety, boundary: Boundary) -> Result<Self> {
        Self::new(Model::Toric(x), boundary)
    }

    /// `K + B`.
    pub fn log_canonical(&self) -> Result<RationalDivisor> {
        Ok(&self.model.canonical()? + self.boundary.divisor())
    }
}
