//! Error norms, convergence rates and study orchestration.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{make_quadrature, Point, QuadratureRule, Shape};
use crate::error::{Error, Result};
use crate::hdg::{
    post_process_fluid, post_process_scaled, ElementField, HdgProblem, HdgSolution, SolverOptions,
};
use crate::mesh::{build_structured_mesh, BoxDomain, Mesh};
use crate::physics::{ManufacturedCase, Regularity};

/// Where errors are measured: the whole mesh or an element-aligned box.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Region {
    #[default]
    All,
    Box(BoxDomain),
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::All => write!(f, "all"),
            Region::Box(b) => write!(f, "{:?}x{:?}", b.lo, b.hi),
        }
    }
}

impl Region {
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self> {
        Ok(Region::Box(BoxDomain::new(lo, hi)?))
    }

    /// Elements inside the region; fails if the box cuts an element.
    pub fn elements(&self, mesh: &Mesh) -> Result<Vec<usize>> {
        let Region::Box(b) = self else {
            return Ok((0..mesh.elements.len()).collect());
        };
        if b.dim() != mesh.dim {
            return Err(Error::RegionNotAligned(format!(
                "{}-dimensional region on a {}-dimensional mesh",
                b.dim(),
                mesh.dim
            )));
        }
        let strictly_inside =
            |x: &Point| (0..b.dim()).all(|d| x[d] > b.lo[d] + 1e-12 && x[d] < b.hi[d] - 1e-12);
        let mut out = Vec::new();
        for (e, el) in mesh.elements.iter().enumerate() {
            let inside = b.contains(&el.centroid);
            let all_in = el.vertices.iter().all(|&v| b.contains(&mesh.vertices[v]));
            let any_in = el
                .vertices
                .iter()
                .any(|&v| strictly_inside(&mesh.vertices[v]));
            if inside && all_in {
                out.push(e);
            } else if inside || any_in {
                return Err(Error::RegionNotAligned(format!(
                    "region {self} cuts element {e}"
                )));
            }
        }
        if out.is_empty() {
            return Err(Error::RegionNotAligned(format!(
                "region {self} contains no element"
            )));
        }
        Ok(out)
    }
}

/// Quantities a study can track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    P,
    U,
    PStar,
    PTilde,
    PTildeStar,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::P,
        Field::U,
        Field::PStar,
        Field::PTilde,
        Field::PTildeStar,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Field::P => "p",
            Field::U => "u",
            Field::PStar => "pstar",
            Field::PTilde => "ptilde",
            Field::PTildeStar => "ptildestar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown field {s:?}")))
    }
}

/// Quadrature exactness for error integrals: `2k + boost`, and `2k + rough_boost`
/// on elements touching the interface of a rough case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorQuadrature {
    pub boost: usize,
    pub rough_boost: usize,
}

impl Default for ErrorQuadrature {
    fn default() -> Self {
        Self {
            boost: 6,
            rough_boost: 8,
        }
    }
}

impl ErrorQuadrature {
    pub fn doubled(self) -> Self {
        Self {
            boost: 2 * self.boost,
            rough_boost: 2 * self.rough_boost,
        }
    }

    fn degree(&self, mesh: &Mesh, case: &ManufacturedCase, k: usize, e: usize) -> usize {
        let el = &mesh.elements[e];
        let rough = case.regularity != Regularity::Smooth
            && !case.one_phase(&el.centroid)
            && el
                .vertices
                .iter()
                .any(|&v| case.one_phase(&mesh.vertices[v]));
        2 * k + if rough { self.rough_boost } else { self.boost }
    }
}

/// `(Σ_K ∫_K dev²)^{1/2}` over the given elements, where `dev(e, ref, phys)`
/// returns squared deviations at the rule points.
pub fn l2_error_by<F>(
    mesh: &Mesh,
    elements: &[usize],
    degree: impl Fn(usize) -> usize,
    dev: F,
) -> Result<f64>
where
    F: Fn(usize, &[Point], &[Point]) -> Result<Vec<f64>> + Sync,
{
    let mut rules: BTreeMap<usize, QuadratureRule> = BTreeMap::new();
    let degrees: Vec<usize> = elements.iter().map(|&e| degree(e)).collect();
    for &d in &degrees {
        if !rules.contains_key(&d) {
            rules.insert(d, make_quadrature(mesh.shape, d)?);
        }
    }
    let parts = elements
        .par_iter()
        .zip(&degrees)
        .map(|(&e, d)| {
            let rule = &rules[d];
            let el = &mesh.elements[e];
            let phys: Vec<Point> = rule.points.iter().map(|p| el.map.map(p)).collect();
            let sq = dev(e, &rule.points, &phys)?;
            Ok(sq
                .iter()
                .zip(&rule.weights)
                .map(|(s, w)| s * w)
                .sum::<f64>()
                * el.map.det_abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// Error of an element field against a scalar function.
pub fn l2_error(
    mesh: &Mesh,
    field: &ElementField,
    exact: impl Fn(&Point) -> f64 + Sync,
    region: &Region,
    degree: usize,
) -> Result<f64> {
    let elements = region.elements(mesh)?;
    l2_error_by(
        mesh,
        &elements,
        |_| degree,
        |e, r, x| {
            let vals = field.values(e, &field.table(r)).ok_or_else(|| {
                Error::InvalidParameter(format!("field undefined on element {e}"))
            })?;
            Ok(vals
                .iter()
                .zip(x)
                .map(|(v, x)| (v[0] - exact(x)).powi(2))
                .collect())
        },
    )
}

/// Post-processed fields needed by a set of tracked quantities.
#[derive(Debug, Clone, Default)]
pub struct PostProcessed {
    pub pstar: Option<ElementField>,
    pub ptilde_star: Option<ElementField>,
}

impl PostProcessed {
    pub fn compute(
        mesh: &Mesh,
        case: &ManufacturedCase,
        sol: &HdgSolution,
        fields: &[Field],
        region: &Region,
    ) -> Result<Self> {
        let mut out = Self::default();
        if fields.contains(&Field::PStar) {
            out.pstar = Some(post_process_scaled(mesh, case, sol)?);
        }
        if fields.contains(&Field::PTildeStar) {
            let elements = region.elements(mesh)?;
            out.ptilde_star = Some(post_process_fluid(mesh, case, sol, &elements)?);
        }
        Ok(out)
    }
}

/// L² error of a tracked quantity on a region.
pub fn field_error(
    mesh: &Mesh,
    case: &ManufacturedCase,
    sol: &HdgSolution,
    post: &PostProcessed,
    field: Field,
    region: &Region,
    quad: ErrorQuadrature,
) -> Result<f64> {
    let elements = region.elements(mesh)?;
    let k = sol.space.k;
    let sp = &sol.space;
    let dim = mesh.dim;
    let missing =
        |f: Field| Error::InvalidParameter(format!("{} was not post-processed", f.label()));
    let star = match field {
        Field::PStar => Some(post.pstar.as_ref().ok_or_else(|| missing(field))?),
        Field::PTildeStar => Some(post.ptilde_star.as_ref().ok_or_else(|| missing(field))?),
        _ => None,
    };
    l2_error_by(
        mesh,
        &elements,
        |e| quad.degree(mesh, case, k, e),
        |e, r, x| {
            if let Some(star) = star {
                let vals = star
                    .values(e, &star.table(r))
                    .ok_or(Error::PostProcessRefused(e))?;
                return Ok(vals
                    .iter()
                    .zip(x)
                    .map(|(v, x)| {
                        let ex = case.exact(x);
                        let target = if field == Field::PStar {
                            ex.p
                        } else {
                            ex.ptilde.unwrap_or(0.0)
                        };
                        (v[0] - target).powi(2)
                    })
                    .collect());
            }
            let table = sp.element.basis_at(r);
            Ok(x.iter()
                .enumerate()
                .map(|(q, x)| {
                    let (p, u) = sol.eval_with_basis(e, table.row(q));
                    let ex = case.exact(x);
                    match field {
                        Field::P => (p - ex.p).powi(2),
                        Field::U => (0..dim).map(|d| (u[d] - ex.u[d]).powi(2)).sum(),
                        _ => {
                            let pt = if case.one_phase(x) {
                                0.0
                            } else {
                                p / case.porosity.phi(x).sqrt()
                            };
                            (pt - ex.ptilde.unwrap_or(0.0)).powi(2)
                        }
                    }
                })
                .collect())
        },
    )
}

/// Observed order between consecutive meshes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rate {
    /// First row of a sequence.
    Absent,
    /// The finer error is exactly zero.
    Exact,
    Value(f64),
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        match self {
            Rate::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// `log(e_{i-1}/e_i) / log(h_{i-1}/h_i)`, absent for the first entry.
pub fn rates(errors: &[f64], hs: &[f64]) -> Result<Vec<Rate>> {
    if errors.len() != hs.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} errors for {} mesh sizes",
            errors.len(),
            hs.len()
        )));
    }
    if errors.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(Error::InvalidParameter(
            "errors must be finite and non-negative".into(),
        ));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) || hs.iter().any(|h| *h <= 0.0) {
        return Err(Error::InvalidParameter(
            "mesh sizes must be positive and strictly decreasing".into(),
        ));
    }
    let mut out = Vec::with_capacity(errors.len());
    for i in 0..errors.len() {
        out.push(if i == 0 {
            Rate::Absent
        } else if errors[i] == 0.0 || errors[i - 1] == 0.0 {
            Rate::Exact
        } else {
            Rate::Value((errors[i - 1] / errors[i]).ln() / (hs[i - 1] / hs[i]).ln())
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub k: usize,
    pub n: usize,
    pub h: f64,
    /// One per tracked field; `Err` holds the failure message of the row.
    pub errors: std::result::Result<Vec<f64>, String>,
    pub rates: Vec<Rate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub case: String,
    pub fields: Vec<Field>,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn new(case: &str, fields: &[Field]) -> Self {
        Self {
            case: case.to_string(),
            fields: fields.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Appends a row and fills its rates against the previous successful row of the same k.
    pub fn push(
        &mut self,
        k: usize,
        n: usize,
        h: f64,
        errors: std::result::Result<Vec<f64>, String>,
    ) {
        let nf = self.fields.len();
        let mut rates = vec![Rate::Absent; nf];
        if let Ok(e) = &errors {
            let prev = self
                .rows
                .iter()
                .rev()
                .find(|r| r.k == k && r.errors.is_ok())
                .filter(|r| r.h > h);
            if let Some(TableRow {
                h: h0,
                errors: Ok(e0),
                ..
            }) = prev
            {
                for i in 0..nf {
                    if let Ok(r) = rates_pair(e0[i], e[i], *h0, h) {
                        rates[i] = r;
                    }
                }
            }
        }
        self.rows.push(TableRow {
            k,
            n,
            h,
            errors,
            rates,
        });
    }

    pub fn column(&self, field: Field) -> Option<usize> {
        self.fields.iter().position(|f| *f == field)
    }

    /// Rows of one order, in mesh order.
    pub fn rows_for(&self, k: usize) -> Vec<&TableRow> {
        self.rows.iter().filter(|r| r.k == k).collect()
    }

    /// Error and rate of `field` in the finest successful row of order `k`.
    pub fn finest(&self, k: usize, field: Field) -> Option<(f64, Rate)> {
        let c = self.column(field)?;
        self.rows_for(k)
            .into_iter()
            .rev()
            .find_map(|r| r.errors.as_ref().ok().map(|e| (e[c], r.rates[c])))
    }

    pub fn error(&self, k: usize, n: usize, field: Field) -> Option<f64> {
        let c = self.column(field)?;
        self.rows
            .iter()
            .find(|r| r.k == k && r.n == n)
            .and_then(|r| r.errors.as_ref().ok().map(|e| e[c]))
    }
}

fn rates_pair(e0: f64, e1: f64, h0: f64, h1: f64) -> Result<Rate> {
    Ok(rates(&[e0, e1], &[h0, h1])?[1])
}

/// Everything that defines a convergence study.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub case: ManufacturedCase,
    pub shape: Shape,
    pub ks: Vec<usize>,
    pub ns: Vec<usize>,
    pub options: SolverOptions,
    pub region: Region,
    pub fields: Vec<Field>,
    pub quadrature: ErrorQuadrature,
}

impl StudySpec {
    pub fn new(case: ManufacturedCase, ks: &[usize], ns: &[usize]) -> Self {
        Self {
            shape: case.default_shape(),
            case,
            ks: ks.to_vec(),
            ns: ns.to_vec(),
            options: SolverOptions::default(),
            region: Region::All,
            fields: vec![Field::P, Field::U],
            quadrature: ErrorQuadrature::default(),
        }
    }
}

/// Solves one (k, n) cell and measures the tracked fields.
pub fn run_cell(spec: &StudySpec, k: usize, mesh: &Mesh) -> Result<Vec<f64>> {
    let problem = HdgProblem::new(mesh, &spec.case, k, spec.options.clone())?;
    let sol = problem.solve()?;
    let post = PostProcessed::compute(mesh, &spec.case, &sol, &spec.fields, &spec.region)?;
    spec.fields
        .iter()
        .map(|&f| {
            field_error(
                mesh,
                &spec.case,
                &sol,
                &post,
                f,
                &spec.region,
                spec.quadrature,
            )
        })
        .collect()
}

/// Runs every (k, n) cell in order. Failed cells become failed rows.
pub fn run_study(spec: &StudySpec) -> Result<ConvergenceTable> {
    if spec.ks.is_empty() || spec.ns.is_empty() || spec.fields.is_empty() {
        return Err(Error::InvalidParameter(
            "a study needs k, n and field lists".into(),
        ));
    }
    let mut table = ConvergenceTable::new(&spec.case.name, &spec.fields);
    for &k in &spec.ks {
        for &n in &spec.ns {
            let mesh = build_structured_mesh(&spec.case.domain, spec.shape, n)?;
            let h = mesh.side_length();
            let errors = run_cell(spec, k, &mesh).map_err(|e| e.to_string());
            table.push(k, n, h, errors);
        }
    }
    Ok(table)
}

/// Observed rates of the element-wise L² projection of the exact pressure,
/// a check of the error pipeline that does not involve the solver.
pub fn interpolant_rates(
    case: &ManufacturedCase,
    shape: Shape,
    k: usize,
    ns: &[usize],
) -> Result<Vec<Rate>> {
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for &n in ns {
        let mesh = build_structured_mesh(&case.domain, shape, n)?;
        let proj = crate::hdg::l2_projection(&mesh, k, |x| case.exact(x).p)?;
        errs.push(l2_error(
            &mesh,
            &proj,
            |x| case.exact(x).p,
            &Region::All,
            2 * k + 6,
        )?);
        hs.push(mesh.side_length());
    }
    rates(&errs, &hs)
}
