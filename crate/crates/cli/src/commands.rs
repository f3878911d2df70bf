use std::path::Path;

use serde_json::{json, Value};
use twolevel_core::catalog::{self, Instance, Params};
use twolevel_core::classify::{analyze_singularities, predict_quantum_numbers};
use twolevel_core::construct::{Grid, LevelPair};
use twolevel_core::deform::{apply_mobius, deformed_potential, mobius_potential, CanonicalDeformParams, MobiusParams};
use twolevel_core::exprlang::{ExprError, ParsedFunction};
use twolevel_core::pipeline::{self, Construction, VerifyOptions};
use twolevel_core::radial::{channel_residual, synthesize_radial, RadialSpec};
use twolevel_core::spectral::{check_two_levels, SampledConstruction};
use twolevel_core::Error;

use crate::args::{
    CatalogAction, ClassifyArgs, ConstructArgs, DeformArgs, Format, RadialArgs, Source, VerifyArgs,
};
use crate::output::{diagnostic, document, sink, write_csv, write_json};
use crate::table;

pub enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
    /// The report has been written; only the exit status is left.
    Rejected(u8),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<ExprError> for Failure {
    fn from(e: ExprError) -> Self {
        Failure::Core(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

const DEFAULT_DOMAIN: (f64, f64) = (-10.0, 10.0);

fn parse_params(raw: &[String]) -> Result<Params, Failure> {
    let mut out = Params::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--param expects KEY=VALUE, got '{item}'")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--param {k}: '{v}' is not a number")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn domain_of(raw: &Option<Vec<f64>>, fallback: (f64, f64)) -> Result<(f64, f64), Failure> {
    match raw.as_deref() {
        None => Ok(fallback),
        Some([a, b]) if a < b => Ok((*a, *b)),
        Some(v) => Err(Failure::Usage(format!("--domain needs A < B, got {v:?}"))),
    }
}

fn check_points(n: usize) -> Result<(), Failure> {
    if n < 101 || n.is_multiple_of(2) {
        return Err(Failure::Core(Error::InvalidGrid(format!(
            "grid size must be odd and at least 101, got {n}"
        ))));
    }
    Ok(())
}

fn instance(name: &str, raw: &[String]) -> Result<Instance, Failure> {
    Ok(catalog::instantiate_entry(name, &parse_params(raw)?)?)
}

struct Resolved {
    label: String,
    xi: ParsedFunction,
    levels: LevelPair,
    domain: (f64, f64),
}

fn levels_from(e1: Option<f64>, e2: Option<f64>) -> Result<LevelPair, Failure> {
    match (e1, e2) {
        (Some(a), Some(b)) => Ok(LevelPair::new(a, b)?),
        _ => Err(Failure::Usage("--e1 and --e2 are required unless a catalog entry supplies the levels".into())),
    }
}

fn resolve(src: &Source) -> Result<Resolved, Failure> {
    match (&src.xi, &src.catalog) {
        (Some(text), None) => Ok(Resolved {
            label: text.clone(),
            xi: ParsedFunction::parse(text)?,
            levels: levels_from(src.e1, src.e2)?,
            domain: domain_of(&src.domain, DEFAULT_DOMAIN)?,
        }),
        (None, Some(name)) => {
            if src.e1.is_some() || src.e2.is_some() {
                return Err(Failure::Usage(
                    "catalog entries fix their levels; set them with --param".into(),
                ));
            }
            let inst = instance(name, &src.params)?;
            Ok(Resolved {
                label: name.clone(),
                xi: inst.xi.clone(),
                levels: inst.levels,
                domain: domain_of(&src.domain, inst.domain)?,
            })
        }
        _ => Err(Failure::Usage("give either --xi or --catalog".into())),
    }
}

fn announce_inversion(c: &Construction) {
    if c.inverted {
        diagnostic(
            "warning",
            "inverted",
            "lower level carries more nodes of the input; using its reciprocal",
            Some(json!({ "xi": c.xi.to_string() })),
        );
    }
}

fn emit_construction(c: &Construction, label: &str, command: &str, extra: Vec<(&str, Value)>, format: Format, out: Option<&Path>) -> Outcome {
    let r = &c.result;
    let mut w = sink(out)?;
    match format {
        Format::Csv => write_csv(
            &mut *w,
            &[("x", &r.x), ("U", &r.u), ("psi1", &r.psi1), ("psi2", &r.psi2), ("W", &r.w)],
        )?,
        Format::Json => {
            let mut fields = vec![
                ("input", Value::from(label)),
                ("xi", Value::from(c.xi.to_string())),
                ("inverted", Value::from(c.inverted)),
                ("levels", json!(c.levels)),
                ("prediction", json!(c.prediction)),
                ("singularities", json!(c.report)),
            ];
            fields.extend(extra);
            fields.push(("result", json!(r)));
            write_json(&mut *w, &document(command, fields))?
        }
    }
    Ok(())
}

pub fn construct(a: &ConstructArgs) -> Outcome {
    check_points(a.source.n)?;
    let src = resolve(&a.source)?;
    let grid = Grid::new(src.domain.0, src.domain.1, a.source.n)?;
    let c = pipeline::construct(&src.xi, src.levels, grid)?;
    announce_inversion(&c);
    emit_construction(&c, &src.label, "construct", Vec::new(), a.format, a.out.as_deref())
}

pub fn classify(a: &ClassifyArgs) -> Outcome {
    let src = resolve(&a.source)?;
    let report = analyze_singularities(&src.xi, src.levels.delta_e, src.domain)?;
    let prediction = predict_quantum_numbers(&report);
    let mut w = sink(a.out.as_deref())?;
    let mut fields = vec![
        ("input", Value::from(src.label.as_str())),
        ("levels", json!(src.levels)),
        ("report", json!(report)),
    ];
    match &prediction {
        Ok(p) => fields.push(("prediction", json!(p))),
        Err(e) => fields.push(("rejection", Value::from(e.to_string()))),
    }
    write_json(&mut *w, &document("classify", fields))?;
    prediction.map(|_| ()).map_err(Failure::Core)
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    if let Some(path) = &a.csv {
        return verify_table(a, path);
    }
    check_points(a.source.n)?;
    let src = resolve(&a.source)?;
    let opts = VerifyOptions {
        n: a.source.n,
        tolerance: a.tolerance,
        auto_domain: !a.fixed_domain,
    };
    let v = pipeline::construct_and_verify(&src.xi, src.levels, src.domain, opts)?;
    announce_inversion(&v.construction);
    let doc = document(
        "verify",
        vec![
            ("input", Value::from(src.label.as_str())),
            ("xi", Value::from(v.construction.xi.to_string())),
            ("inverted", Value::from(v.construction.inverted)),
            ("report", json!(v.report)),
            ("domains", json!(v.domains)),
        ],
    );
    finish_report(&doc, &v.report, a.out.as_deref())
}

fn finish_report(doc: &Value, report: &twolevel_core::spectral::VerificationReport, out: Option<&Path>) -> Outcome {
    let mut w = sink(out)?;
    write_json(&mut *w, doc)?;
    for msg in &report.warnings {
        diagnostic("warning", "verification", msg, None);
    }
    if report.pass {
        Ok(())
    } else {
        diagnostic("error", "verification", &report.summary(), None);
        Err(Failure::Rejected(4))
    }
}

fn verify_table(a: &VerifyArgs, path: &Path) -> Outcome {
    let levels = levels_from(a.source.e1, a.source.e2)?;
    let t = table::read(path).map_err(|m| Failure::Core(Error::InvalidGrid(m)))?;
    let data = SampledConstruction {
        grid: t.grid,
        levels,
        u: &t.u,
        psi1: &t.psi1,
        psi2: &t.psi2,
    };
    let (n1, n2) = (a.n1.unwrap_or(0), a.n2.unwrap_or(0));
    let report = check_two_levels(data, n1, n2, a.tolerance)?;
    let doc = document(
        "verify",
        vec![
            ("input", Value::from(path.display().to_string())),
            ("report", json!(report)),
        ],
    );
    finish_report(&doc, &report, a.out.as_deref())
}

pub fn deform(a: &DeformArgs) -> Outcome {
    check_points(a.n)?;
    let (label, eta, levels, mobius, canonical, fallback) = match (&a.eta, &a.catalog) {
        (Some(text), None) => {
            let eta = ParsedFunction::parse(text)?;
            let levels = levels_from(a.e1, a.e2)?;
            let (m, c) = match (&a.mobius, &a.canonical) {
                (Some(v), None) => (
                    Some(MobiusParams {
                        c1: v[0],
                        c2: v[1],
                        d1: v[2],
                        d2: v[3],
                    }),
                    None,
                ),
                (None, Some(v)) => (None, Some(CanonicalDeformParams::new(v[0], v[1], levels.delta_e)?)),
                _ => return Err(Failure::Usage("give one of --mobius or --canonical".into())),
            };
            (text.clone(), eta, levels, m, c, DEFAULT_DOMAIN)
        }
        (None, Some(name)) => {
            if a.e1.is_some() || a.e2.is_some() {
                return Err(Failure::Usage("catalog entries fix their levels; set them with --param".into()));
            }
            let inst = instance(name, &a.params)?;
            let Some(d) = inst.deformation.clone() else {
                return Err(Failure::Core(Error::Unsupported(format!(
                    "catalog entry '{name}' is not a deformation"
                ))));
            };
            (name.clone(), d.eta, inst.levels, None, Some(d.params), inst.domain)
        }
        _ => return Err(Failure::Usage("give either --eta or --catalog".into())),
    };
    let domain = domain_of(&a.domain, fallback)?;
    let xi = match (&mobius, &canonical) {
        (Some(m), _) => ParsedFunction::new(apply_mobius(&eta, m)?),
        (None, Some(c)) => c.equivalent_xi(&eta)?,
        (None, None) => unreachable!(),
    };
    let grid = Grid::new(domain.0, domain.1, a.n)?;
    let c = pipeline::construct(&xi, levels, grid)?;
    announce_inversion(&c);
    // the potential written through eta, against the one built from xi
    let mut mismatch = 0.0f64;
    for (&x, &u) in c.result.x.iter().zip(&c.result.u) {
        let v = match (&mobius, &canonical) {
            (Some(m), _) => mobius_potential(&eta, &levels, m, x)?,
            (None, Some(p)) => deformed_potential(&eta, &levels, p, x),
            (None, None) => unreachable!(),
        };
        if v.is_finite() {
            mismatch = mismatch.max((v - u).abs() / (1.0 + u.abs()));
        }
    }
    let extra = vec![
        ("eta", Value::from(eta.to_string())),
        ("mobius", json!(mobius)),
        ("canonical", json!(canonical)),
        ("formula_mismatch", Value::from(mismatch)),
    ];
    emit_construction(&c, &label, "deform", extra, a.format, a.out.as_deref())
}

pub fn radial(a: &RadialArgs) -> Outcome {
    if a.n < 101 {
        return Err(Failure::Core(Error::InvalidGrid(format!("radial grid needs at least 101 points, got {}", a.n))));
    }
    let (label, xi, base) = match (&a.xi, &a.catalog) {
        (Some(text), None) => (text.clone(), ParsedFunction::parse(text)?, None),
        (None, Some(name)) => {
            let inst = instance(name, &a.params)?;
            (name.clone(), inst.xi.clone(), Some(inst.levels))
        }
        _ => return Err(Failure::Usage("give either --xi or --catalog".into())),
    };
    let (e1, e2) = match (a.e1, a.e2, base) {
        (Some(e1), Some(e2), _) => (e1, e2),
        (None, None, Some(l)) => (l.e1, l.e2),
        _ => return Err(Failure::Usage("--e1 and --e2 are required with an explicit generator".into())),
    };
    let spec = RadialSpec::new(a.l1, a.l2, e1, e2)?;
    let r = synthesize_radial(&xi, &spec, a.rmax, a.n)?;
    let mut w = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_csv(&mut *w, &[("r", &r.r), ("U", &r.u), ("u1", &r.u1), ("u2", &r.u2)])?,
        Format::Json => write_json(
            &mut *w,
            &document(
                "radial",
                vec![
                    ("input", Value::from(label)),
                    ("residuals", json!([channel_residual(&r, 1), channel_residual(&r, 2)])),
                    ("result", json!(r)),
                ],
            ),
        )?,
    }
    Ok(())
}

pub fn catalog(action: &CatalogAction) -> Outcome {
    match action {
        CatalogAction::List { out } => {
            let mut w = sink(out.as_deref())?;
            write_json(&mut *w, &document("catalog list", vec![("entries", json!(catalog::list()))]))?;
        }
        CatalogAction::Show { name, params, out } => {
            let info = catalog::entry_info(name)?;
            let inst = instance(name, params)?;
            let mut w = sink(out.as_deref())?;
            let deformation = inst.deformation.as_ref().map(|d| {
                json!({ "eta": d.eta.to_string(), "params": d.params })
            });
            let doc = document(
                "catalog show",
                vec![
                    ("entry", json!(info)),
                    ("params", json!(inst.params)),
                    ("xi", Value::from(inst.xi.to_string())),
                    ("levels", json!(inst.levels)),
                    ("expected", json!({ "N1": inst.expected.0, "N2": inst.expected.1 })),
                    ("domain", json!(inst.domain)),
                    ("deformation", deformation.unwrap_or(Value::Null)),
                ],
            );
            write_json(&mut *w, &doc)?;
        }
    }
    Ok(())
}
