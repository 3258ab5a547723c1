use gtl_core::bilinear::{SeriesFn, SquaredForm, TauConstants, TauTriple};
use gtl_core::model::{
    Boundary, CdwState, FlaschkaState, FlaschkaVariant, GtlState, N3QState, N3State, TodaState,
};
use gtl_core::State;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryDoc {
    #[default]
    Open,
    Periodic,
}

impl From<BoundaryDoc> for Boundary {
    fn from(b: BoundaryDoc) -> Self {
        match b {
            BoundaryDoc::Open => Boundary::Open,
            BoundaryDoc::Periodic => Boundary::Periodic,
        }
    }
}

impl From<Boundary> for BoundaryDoc {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::Open => BoundaryDoc::Open,
            Boundary::Periodic => BoundaryDoc::Periodic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantDoc {
    AlphaBeta,
    Ab,
}

fn one() -> f64 {
    1.0
}

/// On-disk form of a [`State`], tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateDoc {
    Toda {
        q: Vec<f64>,
        p: Vec<f64>,
        #[serde(default)]
        boundary: BoundaryDoc,
    },
    /// `bonds` holds alpha (or a), `sites` holds beta (or b).
    Flaschka {
        variant: VariantDoc,
        bonds: Vec<f64>,
        sites: Vec<f64>,
        #[serde(default)]
        boundary: BoundaryDoc,
    },
    Gtl {
        n: usize,
        p: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        u: f64,
        v: f64,
    },
    N3 {
        p: [f64; 3],
        a: [f64; 2],
        u: f64,
    },
    N3q {
        q: [f64; 3],
        p: [f64; 3],
        p4: f64,
        q4: f64,
        u0: f64,
        #[serde(default)]
        alpha: f64,
    },
    Cdw {
        c: [f64; 3],
        d2: f64,
        d3: f64,
        w: f64,
        #[serde(default = "one")]
        branch: f64,
    },
}

impl StateDoc {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("malformed state document: {e}")))
    }

    pub fn to_state(&self) -> Result<State, LabError> {
        let s = match self.clone() {
            StateDoc::Toda { q, p, boundary } => State::Toda(TodaState { q, p, boundary: boundary.into() }),
            StateDoc::Flaschka { variant, bonds, sites, boundary } => State::Flaschka(FlaschkaState {
                variant: match variant {
                    VariantDoc::AlphaBeta => FlaschkaVariant::AlphaBeta,
                    VariantDoc::Ab => FlaschkaVariant::AB,
                },
                first: bonds,
                second: sites,
                boundary: boundary.into(),
            }),
            StateDoc::Gtl { n, p, a, b, u, v } => State::Gtl(GtlState { n, p, a, b, u, v }),
            StateDoc::N3 { p, a, u } => State::N3(N3State { p, a, u }),
            StateDoc::N3q { q, p, p4, q4, u0, alpha } => State::N3Q(N3QState { q, p, p4, q4, u0, alpha }),
            StateDoc::Cdw { c, d2, d3, w, branch } => State::Cdw(CdwState { c, d2, d3, w, branch }),
        };
        s.validate().map_err(|e| LabError::Config(format!("invalid state: {e}")))?;
        Ok(s)
    }

    pub fn from_state(s: &State) -> Self {
        match s.clone() {
            State::Toda(t) => StateDoc::Toda { q: t.q, p: t.p, boundary: t.boundary.into() },
            State::Flaschka(f) => StateDoc::Flaschka {
                variant: match f.variant {
                    FlaschkaVariant::AlphaBeta => VariantDoc::AlphaBeta,
                    FlaschkaVariant::AB => VariantDoc::Ab,
                },
                bonds: f.first,
                sites: f.second,
                boundary: f.boundary.into(),
            },
            State::Gtl(g) => StateDoc::Gtl { n: g.n, p: g.p, a: g.a, b: g.b, u: g.u, v: g.v },
            State::N3(n) => StateDoc::N3 { p: n.p, a: n.a, u: n.u },
            State::N3Q(q) => StateDoc::N3q { q: q.q, p: q.p, p4: q.p4, q4: q.q4, u0: q.u0, alpha: q.alpha },
            State::Cdw(c) => StateDoc::Cdw { c: c.c, d2: c.d2, d3: c.d3, w: c.w, branch: c.branch },
        }
    }
}

pub fn read_state(path: &std::path::Path) -> Result<State, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    StateDoc::parse(&text)?.to_state()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsDoc {
    #[serde(default)]
    pub i1: f64,
    #[serde(default)]
    pub i2: f64,
    #[serde(default)]
    pub i3: f64,
    #[serde(default)]
    pub i130: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormDoc {
    #[default]
    Printed,
    Corrected,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BilinearDoc {
    #[default]
    Printed,
    Standard,
}

/// Input of `tau-check`: Taylor coefficients about `t0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TauDoc {
    /// Three-site triple `(tau2, tau3, f)` with its integration constants.
    Gtl {
        #[serde(default)]
        t0: f64,
        tau2: Vec<f64>,
        tau3: Vec<f64>,
        f: Vec<f64>,
        #[serde(default)]
        constants: ConstantsDoc,
        #[serde(default)]
        form: FormDoc,
    },
    /// Lattice bilinear equation at one site.
    Toda {
        #[serde(default)]
        t0: f64,
        prev: Vec<f64>,
        tau: Vec<f64>,
        next: Vec<f64>,
        #[serde(default)]
        variant: BilinearDoc,
    },
}

fn series(t0: f64, c: &[f64], what: &str) -> Result<SeriesFn, LabError> {
    SeriesFn::new(t0, c.to_vec()).map_err(|e| LabError::Config(format!("{what}: {e}")))
}

impl TauDoc {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("malformed tau document: {e}")))
    }

    pub fn triple(t0: f64, tau2: &[f64], tau3: &[f64], f: &[f64], k: &ConstantsDoc) -> Result<TauTriple, LabError> {
        TauTriple::new(
            series(t0, tau2, "tau2")?,
            series(t0, tau3, "tau3")?,
            series(t0, f, "f")?,
            TauConstants { i1: k.i1, i2: k.i2, i3: k.i3, i130: k.i130 },
        )
        .map_err(|e| LabError::Config(format!("invalid triple: {e}")))
    }
}

impl From<FormDoc> for SquaredForm {
    fn from(f: FormDoc) -> Self {
        match f {
            FormDoc::Printed => SquaredForm::Printed,
            FormDoc::Corrected => SquaredForm::Corrected,
        }
    }
}
