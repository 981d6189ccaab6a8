//! The 68 conjectured upper bounds on the Laplacian spectral radius μ and
//! the reward `μ(G) − bound(G)` used to hunt for counterexamples.
//!
//! Bounds 1–32 take the maximum of `f(d_v, m_v)` over vertices, bounds
//! 33–68 the maximum of `f(d_i, m_i, d_j, m_j)` over edges, where `d` is
//! the degree and `m` the average neighbour degree. Every formula returns
//! `2x` when all of its arguments equal `x`.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{DegreeProfile, Graph};
use crate::linalg::lap_spectral_radius;

/// Reward assigned to disconnected graphs. Compared by equality only.
pub const MINUS_INF: f64 = -1_000_000.0;

pub const BOUND_COUNT: u32 = 68;

pub fn is_minus_inf(reward: f64) -> bool {
    reward == MINUS_INF
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    VertexMax,
    EdgeMax,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::VertexMax => "vertex-max",
            Family::EdgeMax => "edge-max",
        })
    }
}

/// Published status of a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Open,
    /// Counterexample found by the cross-entropy agent (some also have a
    /// subquartic witness).
    DisprovedRl,
    /// Counterexample known only from the exhaustive subquartic search.
    DisprovedSubquartic,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Open => "open",
            Status::DisprovedRl => "disproved-rl",
            Status::DisprovedSubquartic => "disproved-subquartic",
        })
    }
}

type VertexFn = fn(f64, f64) -> f64;
type EdgeFn = fn(f64, f64, f64, f64) -> f64;

#[derive(Clone, Copy)]
pub enum Formula {
    Vertex(VertexFn),
    Edge(EdgeFn),
}

#[derive(Clone, Copy)]
pub struct BoundSpec {
    pub id: u32,
    pub formula: Formula,
    /// Right-hand side as plain text.
    pub expression: &'static str,
    pub status: Status,
    /// Name of the 12-vertex subquartic witness, when one is known.
    pub subquartic_witness: Option<&'static str>,
}

impl fmt::Debug for BoundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundSpec")
            .field("id", &self.id)
            .field("family", &self.family())
            .field("expression", &self.expression)
            .field("status", &self.status)
            .finish()
    }
}

/// `μ`, right-hand side and reward of one bound on one graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub mu: f64,
    pub rhs: f64,
    pub reward: f64,
}

impl BoundSpec {
    pub fn family(&self) -> Family {
        match self.formula {
            Formula::Vertex(_) => Family::VertexMax,
            Formula::Edge(_) => Family::EdgeMax,
        }
    }

    /// Evaluates the formula with every degree symbol replaced by `x`.
    pub fn at_uniform(&self, x: f64) -> f64 {
        match self.formula {
            Formula::Vertex(f) => f(x, x),
            Formula::Edge(f) => f(x, x, x, x),
        }
    }

    /// Right-hand side of the bound for a connected graph with `n ≥ 2`.
    pub fn rhs(&self, g: &Graph) -> Result<f64> {
        check_connected(g)?;
        self.rhs_with_profile(g, &g.degree_profile()?)
    }

    /// As [`BoundSpec::rhs`], with a precomputed degree profile of `g`.
    ///
    /// Terms whose formula is not real at a vertex or edge (a negative
    /// radicand) do not take part in the maximum; if no term is real the
    /// bound is undefined on `g`.
    pub fn rhs_with_profile(&self, g: &Graph, p: &DegreeProfile) -> Result<f64> {
        let (d, m) = (&p.degrees, &p.average_degrees);
        let mut best = f64::NEG_INFINITY;
        let mut any = false;
        let mut take = |x: f64| {
            if !x.is_nan() {
                any = true;
                if x > best {
                    best = x;
                }
            }
        };
        match self.formula {
            Formula::Vertex(f) => {
                for v in 0..g.order() {
                    take(f(d[v], m[v]));
                }
            }
            Formula::Edge(f) => {
                for (i, j) in g.edges() {
                    take(f(d[i], m[i], d[j], m[j]));
                }
            }
        }
        if any {
            Ok(best)
        } else {
            Err(Error::UndefinedInvariant(format!(
                "bound {} is not real-valued anywhere on this graph",
                self.id
            )))
        }
    }

    /// `μ(G) − rhs(G)`, or [`MINUS_INF`] when `G` is disconnected.
    pub fn reward(&self, g: &Graph) -> Result<f64> {
        if g.order() < 2 {
            return Err(Error::InvalidInput("reward needs n ≥ 2".into()));
        }
        if !g.is_connected() {
            return Ok(MINUS_INF);
        }
        let mu = lap_spectral_radius(g)?;
        Ok(mu - self.rhs(g)?)
    }

    /// μ, right-hand side and reward for a connected graph.
    pub fn evaluate(&self, g: &Graph) -> Result<Evaluation> {
        check_connected(g)?;
        let mu = lap_spectral_radius(g)?;
        let rhs = self.rhs(g)?;
        Ok(Evaluation {
            mu,
            rhs,
            reward: mu - rhs,
        })
    }
}

fn check_connected(g: &Graph) -> Result<()> {
    if g.order() < 2 {
        return Err(Error::InvalidInput("bounds need n ≥ 2".into()));
    }
    if !g.is_connected() {
        return Err(Error::UndefinedInvariant(
            "bounds are defined on connected graphs only".into(),
        ));
    }
    Ok(())
}

/// Evaluates several bounds on one connected graph, sharing μ and the
/// degree profile.
pub fn evaluate_many(specs: &[&BoundSpec], g: &Graph) -> Result<Vec<Evaluation>> {
    check_connected(g)?;
    let mu = lap_spectral_radius(g)?;
    let profile = g.degree_profile()?;
    specs
        .iter()
        .map(|s| {
            let rhs = s.rhs_with_profile(g, &profile)?;
            Ok(Evaluation {
                mu,
                rhs,
                reward: mu - rhs,
            })
        })
        .collect()
}

/// All 68 bounds, ordered by id.
pub fn registry() -> &'static [BoundSpec] {
    &REGISTRY
}

pub fn lookup(id: u32) -> Result<&'static BoundSpec> {
    if (1..=BOUND_COUNT).contains(&id) {
        Ok(&REGISTRY[id as usize - 1])
    } else {
        Err(Error::UnknownBound(id))
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

use Status::{DisprovedRl as Rl, DisprovedSubquartic as Sq, Open};

macro_rules! vertex {
    ($id:expr, $status:expr, $sq:expr, $text:expr, |$d:ident, $m:ident| $body:expr) => {
        BoundSpec {
            id: $id,
            formula: Formula::Vertex({
                fn f($d: f64, $m: f64) -> f64 {
                    $body
                }
                f
            }),
            expression: $text,
            status: $status,
            subquartic_witness: $sq,
        }
    };
}

macro_rules! edge {
    ($id:expr, $status:expr, $sq:expr, $text:expr,
     |$di:ident, $mi:ident, $dj:ident, $mj:ident| $body:expr) => {
        BoundSpec {
            id: $id,
            formula: Formula::Edge({
                #[allow(unused_variables)]
                fn f($di: f64, $mi: f64, $dj: f64, $mj: f64) -> f64 {
                    $body
                }
                f
            }),
            expression: $text,
            status: $status,
            subquartic_witness: $sq,
        }
    };
}

const STAR: Option<&str> = Some("SQ*");

static REGISTRY: [BoundSpec; 68] = [
    vertex!(1, Open, None, "sqrt(4 d^3 / m)", |d, m| (4.0 * d * d * d / m).sqrt()),
    vertex!(2, Sq, STAR, "2 m^2 / d", |d, m| 2.0 * m * m / d),
    vertex!(3, Rl, STAR, "m^2 / d + m", |d, m| m * m / d + m),
    vertex!(4, Open, None, "2 d^2 / m", |d, m| 2.0 * d * d / m),
    vertex!(5, Open, None, "d^2 / m + m", |d, m| d * d / m + m),
    vertex!(6, Open, None, "sqrt(m^2 + 3 d^2)", |d, m| (m * m + 3.0 * d * d).sqrt()),
    vertex!(7, Open, None, "d^2 / m + d", |d, m| d * d / m + d),
    vertex!(8, Open, None, "sqrt(d (m + 3 d))", |d, m| (d * (m + 3.0 * d)).sqrt()),
    vertex!(9, Open, None, "(m + 3 d) / 2", |d, m| (m + 3.0 * d) / 2.0),
    // printed with an unbalanced parenthesis; this reading is the one that
    // evaluates to 2x
    vertex!(10, Open, None, "sqrt(d (d + 3 m))", |d, m| (d * (d + 3.0 * m)).sqrt()),
    vertex!(11, Open, None, "2 m^3 / d^2", |d, m| 2.0 * m * m * m / (d * d)),
    vertex!(12, Open, None, "sqrt(2 m^2 + 2 d^2)", |d, m| (2.0 * m * m + 2.0 * d * d).sqrt()),
    vertex!(13, Open, None, "2 m^4 / d^3", |d, m| 2.0 * sq(sq(m)) / (d * d * d)),
    vertex!(14, Open, None, "2 d^3 / m^2", |d, m| 2.0 * d * d * d / (m * m)),
    vertex!(15, Rl, STAR, "sqrt(4 m^3 / d)", |d, m| (4.0 * m * m * m / d).sqrt()),
    vertex!(16, Open, None, "2 d^4 / m^3", |d, m| 2.0 * sq(sq(d)) / (m * m * m)),
    vertex!(17, Sq, Some("SQ17"), "(5 d^4 + 11 m^4)^(1/4)", |d, m| {
        (5.0 * sq(sq(d)) + 11.0 * sq(sq(m))).sqrt().sqrt()
    }),
    vertex!(18, Open, None, "sqrt(2 m^3 / d + 2 d^2)", |d, m| {
        (2.0 * m * m * m / d + 2.0 * d * d).sqrt()
    }),
    vertex!(19, Open, None, "(4 d^4 + 12 d m^3)^(1/4)", |d, m| {
        (4.0 * sq(sq(d)) + 12.0 * d * m * m * m).sqrt().sqrt()
    }),
    vertex!(20, Open, None, "sqrt(7 d^2 + 9 m^2) / 2", |d, m| {
        (7.0 * d * d + 9.0 * m * m).sqrt() / 2.0
    }),
    vertex!(21, Open, None, "sqrt(d^3 / m + 3 m^2)", |d, m| {
        (d * d * d / m + 3.0 * m * m).sqrt()
    }),
    vertex!(22, Open, None, "(2 d^4 + 14 d^2 m^2)^(1/4)", |d, m| {
        (2.0 * sq(sq(d)) + 14.0 * d * d * m * m).sqrt().sqrt()
    }),
    vertex!(23, Open, None, "sqrt(d^2 + 3 d m)", |d, m| (d * d + 3.0 * d * m).sqrt()),
    vertex!(24, Open, None, "(6 d^4 + 10 m^4)^(1/4)", |d, m| {
        (6.0 * sq(sq(d)) + 10.0 * sq(sq(m))).sqrt().sqrt()
    }),
    vertex!(25, Open, None, "(3 d^4 + 13 d^2 m^2)^(1/4)", |d, m| {
        (3.0 * sq(sq(d)) + 13.0 * d * d * m * m).sqrt().sqrt()
    }),
    vertex!(26, Open, None, "sqrt(5 d^2 + 11 d m) / 2", |d, m| {
        (5.0 * d * d + 11.0 * d * m).sqrt() / 2.0
    }),
    vertex!(27, Open, None, "sqrt((3 d^2 + 5 d m) / 2)", |d, m| {
        ((3.0 * d * d + 5.0 * d * m) / 2.0).sqrt()
    }),
    vertex!(28, Rl, STAR, "sqrt(2 m^4 / d^2 + 2 d m)", |d, m| {
        (2.0 * sq(sq(m)) / (d * d) + 2.0 * d * m).sqrt()
    }),
    vertex!(29, Rl, STAR, "sqrt(m^2 + 3 m^3 / d)", |d, m| {
        (m * m + 3.0 * m * m * m / d).sqrt()
    }),
    vertex!(30, Open, None, "m^3 / d^2 + d^2 / m", |d, m| m * m * m / (d * d) + d * d / m),
    vertex!(31, Rl, STAR, "4 m^2 / (m + d)", |d, m| 4.0 * m * m / (m + d)),
    vertex!(32, Sq, STAR, "sqrt(m^3 (m + 3 d)) / d", |d, m| {
        (m * m * m * (m + 3.0 * d)).sqrt() / d
    }),
    edge!(33, Open, None, "2 (di + dj) - (mi + mj)", |di, mi, dj, mj| {
        2.0 * (di + dj) - (mi + mj)
    }),
    edge!(34, Open, None, "2 (di^2 + dj^2) / (di + dj)", |di, mi, dj, mj| {
        2.0 * (di * di + dj * dj) / (di + dj)
    }),
    edge!(35, Open, None, "2 (di^2 + dj^2) / (mi + mj)", |di, mi, dj, mj| {
        2.0 * (di * di + dj * dj) / (mi + mj)
    }),
    edge!(36, Rl, STAR, "2 (mi^2 + mj^2) / (di + dj)", |di, mi, dj, mj| {
        2.0 * (mi * mi + mj * mj) / (di + dj)
    }),
    edge!(37, Open, None, "sqrt(2 (di^2 + dj^2))", |di, mi, dj, mj| {
        (2.0 * (di * di + dj * dj)).sqrt()
    }),
    edge!(38, Open, None, "2 + sqrt(2 (di - 1)^2 + 2 (dj - 1)^2)", |di, mi, dj, mj| {
        2.0 + (2.0 * sq(di - 1.0) + 2.0 * sq(dj - 1.0)).sqrt()
    }),
    edge!(39, Open, None, "2 + sqrt(2 (di^2 + dj^2) - 4 (mi + mj) + 4)", |di, mi, dj, mj| {
        2.0 + (2.0 * (di * di + dj * dj) - 4.0 * (mi + mj) + 4.0).sqrt()
    }),
    edge!(
        40,
        Open,
        None,
        "2 + sqrt(2 ((mi - 1)^2 + (mj - 1)^2) + (di^2 + dj^2) - (di mi + dj mj))",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (sq(mi - 1.0) + sq(mj - 1.0)) + (di * di + dj * dj)
                - (di * mi + dj * mj))
                .sqrt()
        }
    ),
    edge!(
        41,
        Rl,
        None,
        "2 + (mi + mj) - (di + dj) + sqrt(2 (di^2 + dj^2) - 4 (mi + mj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (mi + mj) - (di + dj) + (2.0 * (di * di + dj * dj) - 4.0 * (mi + mj) + 4.0).sqrt()
        }
    ),
    edge!(42, Open, None, "sqrt(di^2 + dj^2 + 2 mi mj)", |di, mi, dj, mj| {
        (di * di + dj * dj + 2.0 * mi * mj).sqrt()
    }),
    edge!(
        43,
        Rl,
        STAR,
        "2 + sqrt(3 (mi^2 + mj^2) - 2 mi mj - 4 (di + dj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (3.0 * (mi * mi + mj * mj) - 2.0 * mi * mj - 4.0 * (di + dj) + 4.0).sqrt()
        }
    ),
    edge!(
        44,
        Open,
        None,
        "2 + sqrt(2 ((di - 1)^2 + (dj - 1)^2 + mi mj - di dj))",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (sq(di - 1.0) + sq(dj - 1.0) + mi * mj - di * dj)).sqrt()
        }
    ),
    edge!(
        45,
        Open,
        None,
        "2 + sqrt((di - dj)^2 + 2 (di mi + dj mj) - 4 (mi + mj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (sq(di - dj) + 2.0 * (di * mi + dj * mj) - 4.0 * (mi + mj) + 4.0).sqrt()
        }
    ),
    edge!(
        46,
        Open,
        None,
        "2 + sqrt(2 (di^2 + dj^2) - 16 di dj / (mi + mj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (di * di + dj * dj) - 16.0 * di * dj / (mi + mj) + 4.0).sqrt()
        }
    ),
    edge!(47, Open, None, "(2 (di^2 + dj^2) - (mi - mj)^2) / (di + dj)", |di, mi, dj, mj| {
        (2.0 * (di * di + dj * dj) - sq(mi - mj)) / (di + dj)
    }),
    edge!(
        48,
        Open,
        None,
        "2 (di^2 + dj^2) / (2 + sqrt(2 (di^2 + dj^2) - 4 (mi + mj) + 4))",
        |di, mi, dj, mj| {
            2.0 * (di * di + dj * dj)
                / (2.0 + (2.0 * (di * di + dj * dj) - 4.0 * (mi + mj) + 4.0).sqrt())
        }
    ),
    edge!(
        49,
        Rl,
        STAR,
        "2 + sqrt(2 (mi^2 + mj^2) + (di - dj)^2 - 4 (di + dj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (mi * mi + mj * mj) + sq(di - dj) - 4.0 * (di + dj) + 4.0).sqrt()
        }
    ),
    edge!(50, Sq, Some("SQ50"), "2 (di^2 + dj^2 + mi mj - di dj) / (di + dj)", |di, mi, dj, mj| {
        2.0 * (di * di + dj * dj + mi * mj - di * dj) / (di + dj)
    }),
    edge!(51, Rl, None, "2 (mi + mj) - 4 mi mj / (di + dj)", |di, mi, dj, mj| {
        2.0 * (mi + mj) - 4.0 * mi * mj / (di + dj)
    }),
    edge!(
        52,
        Rl,
        STAR,
        "2 + sqrt(sqrt(8 (mi^4 + mj^4) - 8 (di^2 + dj^2) + 4) - 4 (di + dj) + 6)",
        |di, mi, dj, mj| {
            2.0 + ((8.0 * (sq(sq(mi)) + sq(sq(mj))) - 8.0 * (di * di + dj * dj) + 4.0).sqrt()
                - 4.0 * (di + dj)
                + 6.0)
                .sqrt()
        }
    ),
    edge!(
        53,
        Rl,
        STAR,
        "2 + sqrt(sqrt(8 (mi^4 + mj^4) - 8 (di mi + dj mj) + 4) - 4 (di + dj) + 6)",
        |di, mi, dj, mj| {
            2.0 + ((8.0 * (sq(sq(mi)) + sq(sq(mj))) - 8.0 * (di * mi + dj * mj) + 4.0).sqrt()
                - 4.0 * (di + dj)
                + 6.0)
                .sqrt()
        }
    ),
    edge!(
        54,
        Rl,
        STAR,
        "2 + sqrt(2 (mi^2 + mj^2) + (di mi + dj mj) - (di^2 + dj^2) - 4 (di + dj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (mi * mi + mj * mj) + (di * mi + dj * mj) - (di * di + dj * dj)
                - 4.0 * (di + dj)
                + 4.0)
                .sqrt()
        }
    ),
    edge!(
        55,
        Rl,
        STAR,
        "2 + sqrt(3 (mi^2 + mj^2) - (di^2 + dj^2) - 4 (mi + mj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (3.0 * (mi * mi + mj * mj) - (di * di + dj * dj) - 4.0 * (mi + mj) + 4.0).sqrt()
        }
    ),
    edge!(56, Open, None, "(di^2 + dj^2) (mi + mj) / (2 di dj)", |di, mi, dj, mj| {
        (di * di + dj * dj) * (mi + mj) / (2.0 * di * dj)
    }),
    edge!(
        57,
        Rl,
        STAR,
        "2 + sqrt(2 (mi^2 + mj^2) - 8 (di^2 + dj^2) / (mi + mj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (mi * mi + mj * mj) - 8.0 * (di * di + dj * dj) / (mi + mj) + 4.0).sqrt()
        }
    ),
    edge!(
        58,
        Rl,
        STAR,
        "2 + sqrt(2 (mi^2 + mi mj + mj^2) - (di mi + dj mj) - 4 (di + dj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (mi * mi + mi * mj + mj * mj) - (di * mi + dj * mj) - 4.0 * (di + dj)
                + 4.0)
                .sqrt()
        }
    ),
    edge!(
        59,
        Rl,
        STAR,
        "(2 (mi^2 + mi mj + mj^2) - (di^2 + dj^2)) / (mi + mj)",
        |di, mi, dj, mj| {
            (2.0 * (mi * mi + mi * mj + mj * mj) - (di * di + dj * dj)) / (mi + mj)
        }
    ),
    edge!(
        60,
        Rl,
        STAR,
        "2 + sqrt(2 (mi^2 + mi mj + mj^2) - (di^2 + dj^2) - 4 (di + dj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (2.0 * (mi * mi + mi * mj + mj * mj) - (di * di + dj * dj) - 4.0 * (di + dj)
                + 4.0)
                .sqrt()
        }
    ),
    edge!(
        61,
        Sq,
        STAR,
        "2 (mi^2 + mj^2) / (2 + sqrt(2 ((di - 1)^2 + (dj - 1)^2)))",
        |di, mi, dj, mj| {
            2.0 * (mi * mi + mj * mj) / (2.0 + (2.0 * (sq(di - 1.0) + sq(dj - 1.0))).sqrt())
        }
    ),
    edge!(
        62,
        Rl,
        STAR,
        "2 + sqrt(mi^2 + 4 mi mj + mj^2 - 2 di dj - 4 (di + dj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (mi * mi + 4.0 * mi * mj + mj * mj - 2.0 * di * dj - 4.0 * (di + dj) + 4.0)
                .sqrt()
        }
    ),
    edge!(63, Rl, STAR, "di + dj + mi + mj - 4 di dj / (mi + mj)", |di, mi, dj, mj| {
        di + dj + mi + mj - 4.0 * di * dj / (mi + mj)
    }),
    edge!(64, Rl, STAR, "mi mj (di + dj) / (di dj)", |di, mi, dj, mj| {
        mi * mj * (di + dj) / (di * dj)
    }),
    edge!(65, Rl, None, "(mi + mj) (di mi + dj mj) / (2 mi mj)", |di, mi, dj, mj| {
        (mi + mj) * (di * mi + dj * mj) / (2.0 * mi * mj)
    }),
    edge!(
        66,
        Rl,
        Some("SQ66"),
        "(mi^2 + 4 mi mj + mj^2 - (di mi + dj mj)) / (di + dj)",
        |di, mi, dj, mj| {
            (mi * mi + 4.0 * mi * mj + mj * mj - (di * mi + dj * mj)) / (di + dj)
        }
    ),
    edge!(67, Rl, STAR, "(mi + mj) (di mi + dj mj) / (2 di dj)", |di, mi, dj, mj| {
        (mi + mj) * (di * mi + dj * mj) / (2.0 * di * dj)
    }),
    edge!(
        68,
        Rl,
        None,
        "2 + sqrt((mi - mj)^2 + 4 di dj - 4 (mi + mj) + 4)",
        |di, mi, dj, mj| {
            2.0 + (sq(mi - mj) + 4.0 * di * dj - 4.0 * (mi + mj) + 4.0).sqrt()
        }
    ),
];
