use std::fs;
use std::path::PathBuf;

use maglattice::config::RunConfig;
use maglattice::constants::{PLANCK, STANDARD_GRAVITY};
use maglattice::dynamics::{
    evolve_chain, evolve_two_mode, sweep_two_mode, uniform_couplings, ChainMode, ChainOptions,
    ChainState, TwoModeOptions, TwoModeTrajectory,
};
use maglattice::field::{field_map_slice, Plane, SliceSpec};
use maglattice::modes::{chain_couplings, ModeCouplings};
use maglattice::quadrature::QuadratureRule;
use maglattice::trap::{
    bias_scan, characterize_depth, locate_site, scan_csv, scan_values, trap_csv_fields, BiasAxis,
    TrapSite, TrapWarning, TRAP_COLUMNS,
};
use maglattice::units::{self, gauss_to_tesla, m_to_um, um_to_m};
use maglattice::Error;

use crate::parse::{self, ChainInit, Height};
use crate::{BjjArgs, CouplingArgs, Failure, FieldArgs, Format, Outputs, PlaneArg, TrapArgs};

fn json_text(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values serialize") + "\n"
}

fn push(out: &mut Outputs, name: &str, text: String) {
    out.push((PathBuf::from(name), text));
}

fn report_warnings(site: &TrapSite) {
    for w in &site.warnings {
        match w {
            TrapWarning::WeakField { b_min, threshold } => eprintln!(
                "warning: B_min = {:.3e} G is below the spin-flip threshold {:.3e} G",
                units::tesla_to_gauss(*b_min),
                units::tesla_to_gauss(*threshold)
            ),
            TrapWarning::CurvatureAsymmetry { relative } => {
                eprintln!("warning: x and y curvatures differ by {relative:.3e} (relative)")
            }
            TrapWarning::HeightConstrained { height } => eprintln!(
                "warning: minimum is degenerate along z; site located at {:.4} um above the film",
                m_to_um(*height)
            ),
        }
    }
}

/// Absolute z of the trap plane, or of the fallback height when the
/// minimum cannot be pinned down.
fn height_at_minimum(run: &RunConfig) -> Result<f64, Failure> {
    match locate_site(run, true) {
        Ok(site) => {
            report_warnings(&site);
            Ok(site.center[2])
        }
        Err(Error::DegenerateMinimum { reason }) => {
            let h = run.fallback_height();
            eprintln!(
                "warning: no isolated minimum ({reason}); using {:.4} um above the film",
                m_to_um(h)
            );
            Ok(run.lattice.film_thickness + h)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn field(run: &RunConfig, a: &FieldArgs, format: Format) -> Result<Outputs, Failure> {
    let lat = &run.lattice;
    let plane = match a.plane {
        PlaneArg::Xy => Plane::Xy {
            z: match a.z {
                Height::Value(z_um) => um_to_m(z_um),
                Height::AtMinimum => height_at_minimum(run)?,
            },
        },
        PlaneArg::Zx => Plane::Zx { y: um_to_m(a.y) },
        PlaneArg::Yz => Plane::Yz { x: um_to_m(a.x) },
    };
    let period_um = m_to_um(lat.period());
    let tau_um = m_to_um(lat.film_thickness);
    let in_plane = (0.0, 2.0 * period_um);
    let vertical = (tau_um, tau_um + 2.0 * period_um);
    let u = a.u_range.unwrap_or(in_plane);
    let v = a.v_range.unwrap_or(if a.plane == PlaneArg::Xy {
        in_plane
    } else {
        vertical
    });
    let n = a.resolution as usize;
    let spec = SliceSpec {
        plane,
        u_range: (um_to_m(u.0), um_to_m(u.1)),
        v_range: (um_to_m(v.0), um_to_m(v.1)),
        resolution: (n, n),
    };
    let slice = field_map_slice(lat, &spec)?;
    let mut out = Outputs::new();
    let stem = format!("field_{}", plane.name());
    if format.csv() {
        push(&mut out, &format!("{stem}.csv"), slice.to_csv());
    }
    if format.json() {
        push(
            &mut out,
            &format!("{stem}.json"),
            json_text(&slice.to_json()),
        );
    }
    Ok(out)
}

pub fn traps(run: &RunConfig, a: &TrapArgs, format: Format) -> Result<Outputs, Failure> {
    let mut out = Outputs::new();
    if let Some(scan) = &a.scan {
        let axis: BiasAxis = scan[0].parse()?;
        let (lo, hi, steps) = parse::range(&scan[1]).map_err(Failure::usage)?;
        let values: Vec<f64> = scan_values(lo, hi, steps)
            .into_iter()
            .map(gauss_to_tesla)
            .collect();
        let rows = bias_scan(run, axis, &values)?;
        let lost = rows.iter().filter(|r| r.site.is_err()).count();
        if lost > 0 {
            eprintln!(
                "warning: {lost} of {} scan points lost the trap",
                rows.len()
            );
        }
        let b = run.lattice.bias;
        let pure_z = axis == BiasAxis::Z && b.x == 0.0 && b.y == 0.0;
        let stem = format!(
            "scan_b{}",
            scan[0].trim_start_matches(['b', 'B']).to_ascii_lowercase()
        );
        if format.csv() {
            push(
                &mut out,
                &format!("{stem}.csv"),
                scan_csv(&rows, pure_z.then_some(&run.lattice)),
            );
        }
        if format.json() {
            let value = serde_json::json!({ "axis": axis, "rows": rows });
            push(&mut out, &format!("{stem}.json"), json_text(&value));
        }
        return Ok(out);
    }

    let mut site = locate_site(run, a.fallback)?;
    let barrier = characterize_depth(run, &mut site)?;
    report_warnings(&site);
    if format.csv() {
        let mut text = format!("site,{TRAP_COLUMNS}\n");
        let mut fields = vec!["0".to_string()];
        fields.extend(trap_csv_fields(&Ok(site.clone())));
        text.push_str(&fields.join(","));
        text.push('\n');
        push(&mut out, "traps.csv", text);
    }
    if format.json() {
        let value = serde_json::json!({
            "frequency_mode": run.settings.frequency_mode.to_string(),
            "site": site,
            "barrier": barrier,
        });
        push(&mut out, "traps.json", json_text(&value));
    }
    Ok(out)
}

fn rule(run: &RunConfig) -> QuadratureRule {
    QuadratureRule::GaussHermite {
        nodes: run.settings.quadrature_nodes,
    }
}

fn located_couplings(run: &RunConfig, sites: usize) -> Result<(TrapSite, ModeCouplings), Failure> {
    let site = locate_site(run, true)?;
    report_warnings(&site);
    let couplings = chain_couplings(run, &site, sites, rule(run))?;
    Ok((site, couplings))
}

pub fn coupling(run: &RunConfig, a: &CouplingArgs, format: Format) -> Result<Outputs, Failure> {
    let mut out = Outputs::new();
    // the comparison fixes its own biases, so the configured one is not used
    if !a.tilt_compare {
        let (site, couplings) = located_couplings(run, a.sites as usize)?;
        if format.csv() {
            push(&mut out, "couplings.csv", couplings.to_csv());
        }
        if format.json() {
            let value = serde_json::json!({
                "frequency_mode": run.settings.frequency_mode.to_string(),
                "tilt_J_per_m": run.settings.tilt,
                "site": site,
                "couplings": couplings,
                "table": couplings.to_json(),
            });
            push(&mut out, "couplings.json", json_text(&value));
        }
    } else {
        let tilt = if run.settings.tilt != 0.0 {
            run.settings.tilt
        } else {
            a.tilt_gravity * run.species.mass * STANDARD_GRAVITY
        };
        if tilt == 0.0 {
            return Err(Failure::usage("the tilted case needs a nonzero tilt"));
        }
        let cases = [
            ("untilted", [10.0, 10.0, 0.0], 0.0),
            ("tilted", [10.0, 10.0, -10.0], tilt),
        ];
        let mut csv = String::from(
            "case,bias_x_G,bias_y_G,bias_z_G,tilt_J_per_m,d_min_um,height_constrained,E0_J,Gamma_J,OmegaJ_J,OmegaJ_kHz\n",
        );
        let mut records = Vec::new();
        for (name, bias, delta) in cases {
            let mut case = run.clone();
            case.lattice = case.lattice.with_bias_gauss(bias);
            case.settings.tilt = delta;
            let (site, c) = located_couplings(&case, 2)?;
            let om = c.josephson[0];
            let fields = [
                name.to_string(),
                maglattice::export::csv_number(bias[0]),
                maglattice::export::csv_number(bias[1]),
                maglattice::export::csv_number(bias[2]),
                maglattice::export::csv_number(delta),
                maglattice::export::csv_number(m_to_um(site.d_min)),
                site.height_constrained.to_string(),
                maglattice::export::csv_number(c.zero_point[0]),
                maglattice::export::csv_number(c.self_interaction[0]),
                maglattice::export::csv_number(om),
                maglattice::export::csv_number(units::joule_to_khz(om)),
            ];
            csv.push_str(&fields.join(","));
            csv.push('\n');
            records.push(serde_json::json!({
                "case": name,
                "bias_G": bias,
                "tilt_J_per_m": delta,
                "site": site,
                "couplings": c,
            }));
        }
        if format.csv() {
            push(&mut out, "tilt_comparison.csv", csv);
        }
        if format.json() {
            push(
                &mut out,
                "tilt_comparison.json",
                json_text(&serde_json::json!({ "cases": records })),
            );
        }
    }
    Ok(out)
}

fn read_couplings(path: &PathBuf) -> Result<ModeCouplings, Failure> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let inner = value.get("couplings").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .map_err(|e| Failure::usage(format!("{}: not a couplings file ({e})", path.display())))
}

fn two_mode_outputs(
    out: &mut Outputs,
    stem: &str,
    trajectories: &[TwoModeTrajectory],
    oracle: bool,
    format: Format,
) {
    if format.csv() {
        if trajectories.len() == 1 {
            push(out, &format!("{stem}.csv"), trajectories[0].to_csv(oracle));
        } else {
            let mut text = String::new();
            for (i, tr) in trajectories.iter().enumerate() {
                let body = tr.to_csv(oracle);
                let mut lines = body.lines();
                let header = lines.next().unwrap_or_default();
                if i == 0 {
                    text.push_str("n0,");
                    text.push_str(header);
                    text.push('\n');
                }
                let n0 = maglattice::export::csv_number(tr.n0);
                for line in lines {
                    text.push_str(&n0);
                    text.push(',');
                    text.push_str(line);
                    text.push('\n');
                }
            }
            push(out, &format!("{stem}.csv"), text);
        }
    }
    if format.json() {
        let value = if trajectories.len() == 1 {
            trajectories[0].to_json()
        } else {
            serde_json::Value::Array(trajectories.iter().map(|t| t.to_json()).collect())
        };
        push(out, &format!("{stem}.json"), json_text(&value));
    }
}

pub fn bjj(_run: &RunConfig, a: &BjjArgs, format: Format) -> Result<Outputs, Failure> {
    let file = a.couplings.as_ref().map(read_couplings).transpose()?;
    let (e0, gamma, omega_j) = match &file {
        Some(c) => (
            c.zero_point.first().copied().unwrap_or(0.0),
            c.self_interaction.first().copied().unwrap_or(0.0),
            c.josephson
                .first()
                .copied()
                .ok_or_else(|| Failure::usage("couplings file has no Josephson coupling"))?,
        ),
        None => (0.0, 0.0, a.omega_j * PLANCK * 1e3),
    };
    let mut out = Outputs::new();

    if let Some(n) = a.chain {
        if n == 0 {
            return Err(Failure::usage("--chain needs at least one site"));
        }
        let couplings = match &file {
            Some(c) if c.len() == n => c.clone(),
            _ => uniform_couplings(n, e0, gamma, omega_j),
        };
        let init = match a.init {
            ChainInit::Center => ChainState::localized(n, n / 2)?,
            ChainInit::Site(k) => ChainState::localized(n, k)?,
            ChainInit::Pair { n0, theta0 } => {
                if n < 2 {
                    return Err(Failure::usage(
                        "pair initial state needs at least two sites",
                    ));
                }
                let mut pops = vec![0.0; n];
                let mut phases = vec![0.0; n];
                pops[0] = (1.0 + n0) / 2.0;
                pops[1] = (1.0 - n0) / 2.0;
                phases[0] = theta0;
                if !(n0.abs() <= 1.0) {
                    return Err(Error::PopulationOutOfRange { value: n0 }.into());
                }
                ChainState::from_populations(&pops, &phases)?
            }
        };
        let mode: ChainMode = a.chain_mode.parse()?;
        let mean_e0 = couplings.zero_point.iter().sum::<f64>() / n as f64;
        let options = ChainOptions {
            t_end: a.t_end,
            dt: a.dt,
            decimation: a.decimation,
            mode,
            energy_unit: (omega_j != 0.0).then_some(omega_j.abs()),
            energy_offset: mean_e0,
        };
        let tr = evolve_chain(&couplings, &init, options)?;
        if format.csv() {
            push(&mut out, "chain.csv", tr.to_csv());
        }
        if format.json() {
            let value = serde_json::json!({ "couplings": couplings, "trajectory": tr.to_json() });
            push(&mut out, "chain.json", json_text(&value));
        }
        return Ok(out);
    }

    let options = TwoModeOptions {
        t_end: a.t_end,
        dt: a.dt,
        decimation: a.decimation,
    };
    if let Some(n0s) = &a.sweep_n0 {
        let trajectories = sweep_two_mode(n0s, a.theta0, omega_j, e0, options)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        two_mode_outputs(&mut out, "bjj_sweep", &trajectories, a.oracle, format);
    } else {
        let tr = evolve_two_mode(a.n0, a.theta0, omega_j, e0, options)?;
        two_mode_outputs(&mut out, "bjj", &[tr], a.oracle, format);
    }
    Ok(out)
}
