//! Feeding, depletion and predation systems built on the Lenia step.
//!
//! `[p]^f` below is `min(p, f)`: a creature takes at most what it has.

use rayon::prelude::*;

use crate::clipcore::{clip_between, ClipBounds};
use crate::error::{Error, Result};
use crate::field::{MultiField, ScalarField};

use super::{check_step, LeniaSystem};

fn check_grid(f: &ScalarField, g: &ScalarField) -> Result<()> {
    f.check_same_grid(g)
}

fn check_channels(state: &MultiField, expected: usize) -> Result<()> {
    if state.channel_count() != expected {
        return Err(Error::ChannelCount {
            expected,
            actual: state.channel_count(),
        });
    }
    Ok(())
}

/// Pure feeding: `[f + t [phi]^f]` clipped to the bounds of `f`. Where `phi`
/// is negative the creature starves at rate `|phi|`.
pub fn food_step(f: &ScalarField, phi: &ScalarField, t: f64) -> Result<ScalarField> {
    check_step(t)?;
    check_grid(f, phi)?;
    let (a, b) = (f.bounds().lower(), f.bounds().upper());
    let values = f
        .values()
        .par_iter()
        .zip(phi.values().par_iter())
        .map(|(&x, &p)| clip_between(x + t * p.min(x), a, b))
        .collect();
    Ok(f.like(values))
}

/// Feeding plus Lenia growth: `[f + t ([phi]^f + G(K * f))]`.
pub fn combined_step(f: &ScalarField, phi: &ScalarField, sys: &LeniaSystem, t: f64) -> Result<ScalarField> {
    check_step(t)?;
    sys.check_state(f)?;
    check_grid(f, phi)?;
    let g = sys.growth_values(f)?;
    let (a, b) = (sys.bounds.lower(), sys.bounds.upper());
    let values = f
        .values()
        .par_iter()
        .zip(phi.values().par_iter())
        .zip(g.par_iter())
        .map(|((&x, &p), &gx)| clip_between(x + t * (p.min(x) + gx), a, b))
        .collect();
    Ok(f.like(values))
}

/// Food that is used up: channel 0 is the creature `f`, channel 1 the food
/// `phi` with its own bounds.
///
/// `f' = [f + t ([phi]^f + G(K * f))]`, `phi' = [phi - t [phi]^f]`.
pub fn depleting_food_step(state: &MultiField, sys: &LeniaSystem, t: f64) -> Result<MultiField> {
    check_step(t)?;
    check_channels(state, 2)?;
    let (f, phi) = (state.channel(0), state.channel(1));
    sys.check_state(f)?;
    let g = sys.growth_values(f)?;
    let (fa, fb) = (sys.bounds.lower(), sys.bounds.upper());
    let (pa, pb) = (phi.bounds().lower(), phi.bounds().upper());
    let (fv, pv): (Vec<f64>, Vec<f64>) = f
        .values()
        .par_iter()
        .zip(phi.values().par_iter())
        .zip(g.par_iter())
        .map(|((&x, &p), &gx)| {
            let eaten = p.min(x);
            (
                clip_between(x + t * (eaten + gx), fa, fb),
                clip_between(p - t * eaten, pa, pb),
            )
        })
        .unzip();
    MultiField::new(vec![f.like(fv), phi.like(pv)])
}

/// Predator `f` (channel 0) eats prey `g` (channel 1).
///
/// `f' = [f + t ([g]^f + G1(K1 * f))]`, `g' = [g + t (-[g]^f + G2(K2 * g))]`.
pub fn predator_prey_step(
    state: &MultiField,
    predator: &LeniaSystem,
    prey: &LeniaSystem,
    t: f64,
) -> Result<MultiField> {
    check_step(t)?;
    check_channels(state, 2)?;
    let (f, g) = (state.channel(0), state.channel(1));
    predator.check_state(f)?;
    prey.check_state(g)?;
    let g1 = predator.growth_values(f)?;
    let g2 = prey.growth_values(g)?;
    let (fa, fb) = (predator.bounds.lower(), predator.bounds.upper());
    let (ga, gb) = (prey.bounds.lower(), prey.bounds.upper());
    let (fv, gv): (Vec<f64>, Vec<f64>) = f
        .values()
        .par_iter()
        .zip(g.values().par_iter())
        .zip(g1.par_iter().zip(g2.par_iter()))
        .map(|((&x, &y), (&u1, &u2))| {
            let eaten = y.min(x);
            (
                clip_between(x + t * (eaten + u1), fa, fb),
                clip_between(y + t * (-eaten + u2), ga, gb),
            )
        })
        .unzip();
    MultiField::new(vec![f.like(fv), g.like(gv)])
}

/// Predator `f`, prey `g` and the prey's food `phi` (channels 0, 1, 2).
///
/// `f' = [f + t ([g]^f + G1(K1 * f))]`,
/// `g' = [g + t (-[g]^f + [phi]^g + G2(K2 * g))]`,
/// `phi' = [phi - t [phi]^g]`.
pub fn ecosystem_step(state: &MultiField, predator: &LeniaSystem, prey: &LeniaSystem, t: f64) -> Result<MultiField> {
    check_step(t)?;
    let v = ecosystem_vector_field(state, predator, prey)?;
    let channels = state
        .channels()
        .iter()
        .zip(v.channels())
        .map(|(c, d)| {
            let (a, b) = (c.bounds().lower(), c.bounds().upper());
            let values = c
                .values()
                .par_iter()
                .zip(d.values().par_iter())
                .map(|(&x, &dx)| clip_between(x + t * dx, a, b))
                .collect();
            c.like(values)
        })
        .collect();
    MultiField::new(channels)
}

/// The unclipped right-hand side `V5(f, g, phi)` as three unbounded channels.
pub fn ecosystem_vector_field(state: &MultiField, predator: &LeniaSystem, prey: &LeniaSystem) -> Result<MultiField> {
    check_channels(state, 3)?;
    let (f, g, phi) = (state.channel(0), state.channel(1), state.channel(2));
    predator.check_state(f)?;
    prey.check_state(g)?;
    let g1 = predator.growth_values(f)?;
    let g2 = prey.growth_values(g)?;
    let n = f.len();
    let (mut df, mut dg, mut dphi) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    df.par_iter_mut()
        .zip(dg.par_iter_mut())
        .zip(dphi.par_iter_mut())
        .enumerate()
        .for_each(|(i, ((a, b), c))| {
            let (x, y, p) = (f.values()[i], g.values()[i], phi.values()[i]);
            let hunted = y.min(x);
            let grazed = p.min(y);
            *a = hunted + g1[i];
            *b = -hunted + grazed + g2[i];
            *c = -grazed;
        });
    MultiField::new(vec![
        f.like_unbounded(df),
        g.like_unbounded(dg),
        phi.like_unbounded(dphi),
    ])
}

/// Lipschitz constant of `V5` in the sup metric: `2 + max_i C_Gi ||Ki||_1`.
pub fn ecosystem_lipschitz_constant(predator: &LeniaSystem, prey: &LeniaSystem) -> Result<f64> {
    Ok(2.0 + predator.lipschitz_constant()?.max(prey.lipschitz_constant()?))
}

/// Which extension an [`EcosystemSystem`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Static food, no growth term.
    Food,
    /// Static food plus Lenia growth.
    FoodGrowth,
    /// Food consumed by the creature.
    DepletingFood,
    PredatorPrey,
    /// Predator, prey and the prey's food.
    Ecosystem,
}

impl Extension {
    pub fn channel_count(self) -> usize {
        match self {
            Extension::Food | Extension::FoodGrowth => 1,
            Extension::DepletingFood | Extension::PredatorPrey => 2,
            Extension::Ecosystem => 3,
        }
    }

    fn needs_prey(self) -> bool {
        matches!(self, Extension::PredatorPrey | Extension::Ecosystem)
    }

    fn needs_static_food(self) -> bool {
        matches!(self, Extension::Food | Extension::FoodGrowth)
    }
}

/// One extension with its species and food data. The predator system doubles
/// as the single species of the feeding variants.
#[derive(Debug, Clone)]
pub struct EcosystemSystem {
    variant: Extension,
    predator: LeniaSystem,
    prey: Option<LeniaSystem>,
    food: Option<ScalarField>,
    food_bounds: ClipBounds,
}

impl EcosystemSystem {
    pub fn new(
        variant: Extension,
        predator: LeniaSystem,
        prey: Option<LeniaSystem>,
        food: Option<ScalarField>,
        food_bounds: ClipBounds,
    ) -> Result<Self> {
        if !(food_bounds.lower() < food_bounds.upper()) {
            return Err(Error::InvalidBounds {
                lower: food_bounds.lower(),
                upper: food_bounds.upper(),
            });
        }
        if variant.needs_prey() && prey.is_none() {
            return Err(Error::InvalidArgument(format!("{variant:?} needs a prey species")));
        }
        if variant.needs_static_food() && food.is_none() {
            return Err(Error::InvalidArgument(format!("{variant:?} needs a food field")));
        }
        Ok(EcosystemSystem {
            variant,
            predator,
            prey: if variant.needs_prey() { prey } else { None },
            food: if variant.needs_static_food() { food } else { None },
            food_bounds,
        })
    }

    pub fn variant(&self) -> Extension {
        self.variant
    }

    pub fn channel_count(&self) -> usize {
        self.variant.channel_count()
    }

    pub fn predator(&self) -> &LeniaSystem {
        &self.predator
    }

    pub fn prey(&self) -> Option<&LeniaSystem> {
        self.prey.as_ref()
    }

    pub fn food(&self) -> Option<&ScalarField> {
        self.food.as_ref()
    }

    pub fn food_bounds(&self) -> ClipBounds {
        self.food_bounds
    }

    /// Indices of the channels holding creatures (not food).
    pub fn creature_channels(&self) -> Vec<usize> {
        match self.variant {
            Extension::Food | Extension::FoodGrowth | Extension::DepletingFood => vec![0],
            Extension::PredatorPrey | Extension::Ecosystem => vec![0, 1],
        }
    }

    fn check_food_channel(&self, state: &MultiField, index: usize) -> Result<()> {
        if state.channel(index).bounds() != self.food_bounds {
            return Err(Error::InvalidField(format!(
                "food channel bounds differ from [{}, {}]",
                self.food_bounds.lower(),
                self.food_bounds.upper()
            )));
        }
        Ok(())
    }

    pub fn step(&self, state: &MultiField, t: f64) -> Result<MultiField> {
        check_channels(state, self.channel_count())?;
        match self.variant {
            Extension::Food => {
                let food = self.food.as_ref().expect("checked at construction");
                self.predator.check_state(state.channel(0))?;
                MultiField::single(food_step(state.channel(0), food, t)?)
            }
            Extension::FoodGrowth => {
                let food = self.food.as_ref().expect("checked at construction");
                MultiField::single(combined_step(state.channel(0), food, &self.predator, t)?)
            }
            Extension::DepletingFood => {
                self.check_food_channel(state, 1)?;
                depleting_food_step(state, &self.predator, t)
            }
            Extension::PredatorPrey => {
                let prey = self.prey.as_ref().expect("checked at construction");
                predator_prey_step(state, &self.predator, prey, t)
            }
            Extension::Ecosystem => {
                self.check_food_channel(state, 2)?;
                let prey = self.prey.as_ref().expect("checked at construction");
                ecosystem_step(state, &self.predator, prey, t)
            }
        }
    }
}
