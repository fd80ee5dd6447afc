//! Frozen example data sets addressable by string id.
//!
//! Three monopole (curl-fibration) entries and two curl-eigenfield entries,
//! each with a default box that clears its singular loci.

use crate::beltrami::{self, BeltramiData};
use crate::chart::Chart;
use crate::curvature4::Metric4;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, ScalarExpr};
use crate::exterior3::{Frame3, Metric3, OneForm3};
use crate::gibbons_hawking::{self, GHData};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    GibbonsHawking,
    Beltrami,
}

impl Construction {
    pub fn label(&self) -> &'static str {
        match self {
            Construction::GibbonsHawking => "gibbons-hawking",
            Construction::Beltrami => "beltrami",
        }
    }
}

#[derive(Debug, Clone)]
pub enum EntryData {
    Gh(GHData),
    Bel(BeltramiData),
}

#[derive(Debug, Clone)]
pub struct CatalogueEntry {
    pub id: &'static str,
    pub construction: Construction,
    /// Human-readable description of the data and its singular loci.
    pub notes: &'static str,
    pub data: EntryData,
}

impl CatalogueEntry {
    pub fn chart(&self) -> &Arc<Chart> {
        match &self.data {
            EntryData::Gh(d) => d.chart(),
            EntryData::Bel(d) => d.chart(),
        }
    }

    pub fn base_metric(&self) -> &Metric3 {
        match &self.data {
            EntryData::Gh(d) => &d.h,
            EntryData::Bel(d) => &d.h,
        }
    }

    pub fn build(&self) -> Result<Metric4> {
        match &self.data {
            EntryData::Gh(d) => gibbons_hawking::gh_build(d),
            EntryData::Bel(d) => beltrami::beltrami_build(d),
        }
    }

    pub fn frame(&self) -> Result<Frame3> {
        match &self.data {
            EntryData::Gh(d) => gibbons_hawking::gh_frame(d),
            EntryData::Bel(d) => beltrami::beltrami_frame(d),
        }
    }
}

fn parse(text: &str, ch: &Chart) -> ScalarExpr {
    parse_expr(text, ch.coords()).expect("catalogue expression must parse")
}

fn gh_linear() -> CatalogueEntry {
    let ch = Chart::new(
        &["x", "y", "z", "t"],
        vec![(-1.0, 1.0), (-1.0, 1.0), (0.5, 1.5), (0.0, 1.0)],
    );
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("z", &ch),
        a: OneForm3([ScalarExpr::zero(), parse("x", &ch), ScalarExpr::zero()]),
    };
    CatalogueEntry {
        id: "gh.linear",
        construction: Construction::GibbonsHawking,
        notes: "u = z with A = x dy; singular locus z <= 0, box keeps z >= 0.5",
        data: EntryData::Gh(data),
    }
}

/// Dirac-type potential for the pole `m/(2r)` centered at `(0, 0, z0)`.
fn dirac_potential(ch: &Chart, z0: f64) -> OneForm3 {
    let r = format!("sqrt(x^2 + y^2 + (z - {z0})^2)");
    let common = format!("(z - {z0}) / (2 * ({r}) * (x^2 + y^2))");
    OneForm3([
        parse(&format!("0 - y * {common}"), ch),
        parse(&format!("x * {common}"), ch),
        ScalarExpr::zero(),
    ])
}

fn gh_pole1() -> CatalogueEntry {
    let ch = Chart::new(
        &["x", "y", "z", "t"],
        vec![(0.6, 1.4), (0.6, 1.4), (-0.4, 0.4), (0.0, 1.0)],
    );
    let ch = ch.with_exclusion("z-axis", parse("x^2 + y^2", &ch), 1e-2);
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u: parse("1 + 1/(2*sqrt(x^2 + y^2 + z^2))", &ch),
        a: dirac_potential(&ch, 0.0),
    };
    CatalogueEntry {
        id: "gh.pole1",
        construction: Construction::GibbonsHawking,
        notes: "u = 1 + 1/(2r) with a Dirac-type potential; singular on the z-axis and at the origin, box stays off both",
        data: EntryData::Gh(data),
    }
}

fn gh_pole2() -> CatalogueEntry {
    let ch = Chart::new(
        &["x", "y", "z", "t"],
        vec![(0.5, 1.2), (0.5, 1.2), (-0.3, 0.3), (0.0, 1.0)],
    );
    let ch = ch.with_exclusion("z-axis", parse("x^2 + y^2", &ch), 1e-2);
    let u = parse(
        "1 + 1/(2*sqrt(x^2 + y^2 + (z - 1)^2)) + 1/(2*sqrt(x^2 + y^2 + (z + 1)^2))",
        &ch,
    );
    let a_plus = dirac_potential(&ch, 1.0);
    let a_minus = dirac_potential(&ch, -1.0);
    let data = GHData {
        h: Metric3::euclidean(ch.clone()),
        u,
        a: a_plus.add(&a_minus),
    };
    CatalogueEntry {
        id: "gh.pole2",
        construction: Construction::GibbonsHawking,
        notes: "two-pole sum with poles at (0, 0, +-1); singular on the z-axis and at the poles, box stays off both",
        data: EntryData::Gh(data),
    }
}

fn bel_planar() -> CatalogueEntry {
    let ch = Chart::new(
        &["x", "y", "z", "rho"],
        vec![(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (0.5, 2.0)],
    );
    let data = BeltramiData {
        h: Metric3::euclidean(ch.clone()),
        a: OneForm3([parse("cos(2*z)", &ch), parse("sin(2*z)", &ch), ScalarExpr::zero()]),
    };
    CatalogueEntry {
        id: "bel.planar",
        construction: Construction::Beltrami,
        notes: "planar eigenfield with |A| = 1 everywhere; no singular locus, fiber kept away from rho = 0",
        data: EntryData::Bel(data),
    }
}

fn bel_abc() -> CatalogueEntry {
    let ch = Chart::new(
        &["x", "y", "z", "rho"],
        vec![(-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2), (0.5, 2.0)],
    );
    // Unit-coefficient trigonometric eigenfield of curl (eigenvalue 1)
    // composed with the scaling by -2, which turns it into an eigenfield of
    // eigenvalue -2; near the origin |A| stays close to sqrt(3).
    let data = BeltramiData {
        h: Metric3::euclidean(ch.clone()),
        a: OneForm3([
            parse("sin(0 - 2*z) + cos(0 - 2*y)", &ch),
            parse("sin(0 - 2*x) + cos(0 - 2*z)", &ch),
            parse("sin(0 - 2*y) + cos(0 - 2*x)", &ch),
        ]),
    };
    CatalogueEntry {
        id: "bel.abc",
        construction: Construction::Beltrami,
        notes: "trigonometric eigenfield scaled to eigenvalue -2; zeros of |A| exist far away, box near the origin keeps |A| near sqrt(3)",
        data: EntryData::Bel(data),
    }
}

pub fn entries() -> Vec<CatalogueEntry> {
    vec![gh_linear(), gh_pole1(), gh_pole2(), bel_planar(), bel_abc()]
}

pub fn entry(id: &str) -> Result<CatalogueEntry> {
    entries()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::Usage(format!("unknown example id `{id}`")))
}

#[cfg(test)]
mod tests;
