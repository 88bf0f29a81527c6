use std::path::Path;

use affsurf::cohomology::{coderivative_rows, trans_dims};
use affsurf::deformation::{hol_jacobian, hol_res_jacobian, leaf_comparison, leaf_step, JacobianOptions, SpecFamily};
use affsurf::holonomy::{character_on_basis, classify, holonomy, turning_number, LoopBasis};
use affsurf::localsys::{
    compact_support_cohomology, duality_dims, twisted_cohomology, veech_pairing, Character, CharacterData, ComplexData,
    Generators, StandardSurface, SurfaceComplex,
};
use affsurf::numerics::{LoopPath, Quadrature};
use affsurf::residues::{res_gamma, ArcTree};
use affsurf::surface::{check_node_gluing, validate, AffineSurface, AffineSurfaceSpec, NodeGluing};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Command, ComplexArgs, Failure, RunConfig};

type Outcome = Result<(Value, Option<Failure>), Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn done(v: Value) -> Outcome {
    Ok((v, None))
}

fn quadrature(run: &RunConfig, default: Quadrature) -> Result<Quadrature, Failure> {
    match run.tol {
        None => Ok(default),
        Some(t) if t.is_finite() && t > 0.0 => {
            Quadrature::new(t, 40).map_err(|e| Failure::Usage(format!("--tol: {e}")))
        }
        Some(t) => Err(Failure::Usage(format!("--tol must be positive, got {t}"))),
    }
}

fn surface(path: &Path) -> Result<AffineSurface, Failure> {
    let spec: AffineSurfaceSpec = read_json(path)?;
    Ok(AffineSurface::new(spec)?)
}

fn tree_for(s: &AffineSurface, path: Option<&Path>) -> Result<ArcTree, Failure> {
    match path {
        Some(p) => {
            let tree: ArcTree = read_json(p)?;
            tree.validate(s)?;
            Ok(tree)
        }
        None => Ok(ArcTree::straight(s)?),
    }
}

fn local_system(args: &ComplexArgs) -> Result<(SurfaceComplex, Character), Failure> {
    let (complex, standard) = match (&args.complex, args.genus, args.n) {
        (Some(path), _, _) => {
            let data: ComplexData = read_json(path)?;
            (SurfaceComplex::from_data(&data)?, None)
        }
        (None, Some(g), Some(b)) => {
            let s = StandardSurface::new(g, b)?;
            (s.complex.clone(), Some(s))
        }
        _ => return Err(Failure::Usage("give --complex or --genus with --n".into())),
    };
    let chi = if let Some(path) = &args.character {
        let data: CharacterData = read_json(path)?;
        Character::from_data(&complex, &Generators::new(&complex), &data)?
    } else if let Some(text) = &args.cycle_values {
        let Some(s) = &standard else {
            return Err(Failure::Usage("--cycle-values needs a built-in triangulation".into()));
        };
        let values: Vec<Complex64> =
            serde_json::from_str(text).map_err(|e| Failure::Usage(format!("--cycle-values: {e}")))?;
        s.character(&values)?
    } else {
        Character::trivial(&complex)
    };
    Ok((complex, chi))
}

fn parse_order(v: &Value) -> Option<Complex64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| Complex64::new(x, 0.0)),
        _ => serde_json::from_value(v.clone()).ok(),
    }
}

pub fn run(command: &Command, cfg: &RunConfig) -> Outcome {
    match command {
        Command::Validate { surface } => {
            let spec: AffineSurfaceSpec = read_json(surface)?;
            let report = validate(&spec);
            let failure = report.violations.first().map(|v| Failure::Domain {
                error: json!({"kind": v.kind, "message": v.message, "violations": report.violations}),
            });
            Ok((to_value(&report), failure))
        }
        Command::Holonomy { surface: path, r#loop } => {
            let s = surface(path)?;
            let q = quadrature(cfg, Quadrature::default())?;
            match r#loop {
                Some(lp) => {
                    let lp: LoopPath = read_json(lp)?;
                    let chi = holonomy(&s, &lp, &q)?;
                    let tau = turning_number(&s, &lp, &q)?;
                    done(json!({"chi": chi, "tau": tau}))
                }
                None => {
                    let report = character_on_basis(&s, &LoopBasis::standard(&s), &q)?;
                    let mut v = to_value(&report);
                    v["class"] = to_value(&classify(&s, &report));
                    done(v)
                }
            }
        }
        Command::Turning { surface: path, r#loop } => {
            let s = surface(path)?;
            let q = quadrature(cfg, Quadrature::default())?;
            let lp: LoopPath = read_json(r#loop)?;
            done(json!({"tau": turning_number(&s, &lp, &q)?}))
        }
        Command::Residues { surface: path, tree } => {
            let s = surface(path)?;
            let q = quadrature(cfg, Quadrature::default())?;
            let tree = tree_for(&s, tree.as_deref())?;
            done(to_value(&res_gamma(&s, &tree, &q)?))
        }
        Command::Dims { genus, n } => done(to_value(&coderivative_rows(*genus, *n)?)),
        Command::TransDims { surface: path } => {
            let s = surface(path)?;
            let q = quadrature(cfg, Quadrature::default())?;
            done(to_value(&trans_dims(&s, &q)?))
        }
        Command::Twisted { input } => {
            let (k, chi) = local_system(input)?;
            let plain = twisted_cohomology(&k, &chi)?;
            let compact = compact_support_cohomology(&k, &chi)?;
            let (_, dual, duality) = duality_dims(&k, &chi)?;
            done(json!({
                "genus": k.genus(),
                "boundary_count": k.boundary_count(),
                "dims": plain.dims,
                "compact_dims": compact.dims,
                "dual_dims": dual,
                "duality": duality,
                "euler_characteristic": plain.euler_characteristic(),
            }))
        }
        Command::Pairing { input } => {
            let (k, chi) = local_system(input)?;
            done(to_value(&veech_pairing(&k, &chi)?))
        }
        Command::Rank {
            family,
            tree,
            residues,
            step,
        } => {
            let family: SpecFamily = read_json(family)?;
            let base = AffineSurface::new(family.base.clone())?;
            let defaults = JacobianOptions::default();
            let opts = JacobianOptions {
                step: match step {
                    Some(h) if h.is_finite() && *h > 0.0 => *h,
                    Some(h) => return Err(Failure::Usage(format!("--step must be positive, got {h}"))),
                    None => defaults.step,
                },
                quadrature: quadrature(cfg, defaults.quadrature)?,
            };
            let basis = LoopBasis::standard(&base);
            let report = if tree.is_some() || *residues {
                let tree = tree_for(&base, tree.as_deref())?;
                hol_res_jacobian(&family, &basis, &tree, &opts)?
            } else {
                hol_jacobian(&family, &basis, &opts)?
            };
            done(to_value(&report))
        }
        Command::LeafWalk {
            surface: path,
            tree,
            step,
            steps,
        } => {
            let s = surface(path)?;
            let defaults = JacobianOptions::default();
            let opts = JacobianOptions {
                quadrature: quadrature(cfg, defaults.quadrature)?,
                ..defaults
            };
            let start_tree = tree_for(&s, tree.as_deref())?;
            let start = s.spec().clone();
            let (mut spec, mut current) = (start.clone(), start_tree.clone());
            let mut records = Vec::with_capacity(*steps);
            for index in 0..*steps {
                let next = leaf_step(&spec, &current, *step, &opts)?;
                records.push(json!({
                    "index": index,
                    "kernel_dim": next.kernel_dim,
                    "newton_iterations": next.newton_iterations,
                    "holonomy_drift": next.holonomy_drift,
                    "residue_distance": next.residue_distance,
                    "spec": next.spec,
                }));
                spec = next.spec;
                current = next.tree;
            }
            let total = leaf_comparison(&start, &spec, &start_tree, &opts.quadrature)?;
            done(json!({"steps": records, "final_tree": current, "total": total}))
        }
        Command::NodeCheck { orders } => {
            let parsed: Value =
                serde_json::from_str(orders).map_err(|e| Failure::Usage(format!("--orders: {e}")))?;
            let pair = match parsed.as_array().map(|a| a.iter().map(parse_order).collect::<Option<Vec<_>>>()) {
                Some(Some(v)) if v.len() == 2 => (v[0], v[1]),
                _ => return Err(Failure::Usage("--orders must be a JSON array of two orders".into())),
            };
            let gluing = NodeGluing { branch_orders: pair };
            done(json!({
                "branch_orders": [pair.0, pair.1],
                "sum": pair.0 + pair.1,
                "accepted": check_node_gluing(&gluing),
            }))
        }
    }
}
