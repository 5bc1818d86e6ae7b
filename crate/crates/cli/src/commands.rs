use std::io::Write;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chordal_qc::carleson::{
    big_box_check, carleson_scan_with, composite_mu_tilde, mu_density, vmoa_density, OuterDilatation, ZeroOuter,
};
use chordal_qc::extension::{extend, mu_formula, qc_report, reflected_grid, trace_extend, QcOptions};
use chordal_qc::loewner::{
    disk_radius, evolve_record, herglotz_p_in, pde_residual, tau0_scan, trace_csv, HerglotzField,
};
use chordal_qc::maps::{MapRef, MapRegistry};
use chordal_qc::report::row;
use chordal_qc::schwarz::{norm_profile, symbols, StripGrid};
use chordal_qc::{Error, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::{Command, DensityKind, Format, HorizonArgs, Io, LevelArgs, OuterKind};

pub enum Status {
    Pass,
    Fail(String),
}

fn emit(io: &Io, text: &str) -> Result<()> {
    let Some(path) = &io.output else {
        let mut out = std::io::stdout().lock();
        return match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        };
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => ".".into(),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn pretty(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn map(spec: &str) -> Result<MapRef> {
    Ok(MapRegistry::with_catalog().parse(spec)?)
}

fn no_horizon(e: &Error) -> bool {
    matches!(e.root(), Error::NoHorizon { .. })
}

fn horizon_for(h: &MapRef, level: &LevelArgs, hz: &HorizonArgs, grid: &StripGrid) -> Result<f64, Error> {
    match hz.tau {
        Some(t) => Ok(t),
        None => Ok(tau0_scan(&**h, level.variant, level.k, grid, hz.t_max)?.tau),
    }
}

fn field(h: &MapRef, level: &LevelArgs, hz: &HorizonArgs, grid: &StripGrid) -> Result<HerglotzField, Error> {
    match hz.tau {
        Some(t) => HerglotzField::new(h.clone(), level.variant, level.k, t),
        None => HerglotzField::certified(h.clone(), level.variant, level.k, grid, hz.t_max),
    }
}

fn pair(z: C64) -> (f64, f64) {
    (z.re, z.im)
}

pub fn run(cmd: Command) -> Result<Status> {
    match run_inner(cmd) {
        Err(e) => match e.downcast_ref::<Error>() {
            Some(ce) if no_horizon(ce) => Ok(Status::Fail(ce.to_string())),
            _ => Err(e),
        },
        ok => ok,
    }
}

fn run_inner(cmd: Command) -> Result<Status> {
    match cmd {
        Command::MapsList { format, io } => {
            let listing = MapRegistry::with_catalog().listing();
            let text = match format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["usage", "summary"])?;
                    for (u, s) in &listing {
                        w.write_record([u, s])?;
                    }
                    String::from_utf8(w.into_inner()?)?
                }
                Format::Json => pretty(
                    &listing
                        .iter()
                        .map(|(u, s)| json!({"usage": u, "summary": s}))
                        .collect::<Vec<_>>(),
                )?,
            };
            emit(&io, &text)?;
        }

        Command::Eval { map: m, z, format, io } => {
            let h = map(&m.map)?;
            let mut rows = Vec::new();
            for &p in &z {
                let value = h.value(p)?;
                let (ph, sh) = if h.domain().contains(p) {
                    let s = symbols(&*h, p)?;
                    (s.ph, s.sh)
                } else {
                    (C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN))
                };
                rows.push((p, value, ph, sh));
            }
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("z_re,z_im,value_re,value_im,ph_re,ph_im,sh_re,sh_im\n");
                    for (p, v, ph, sh) in &rows {
                        s.push_str(&row(&[p.re, p.im, v.re, v.im, ph.re, ph.im, sh.re, sh.im]));
                    }
                    s
                }
                Format::Json => {
                    let opt = |z: C64| if z.re.is_nan() { None } else { Some(pair(z)) };
                    let pts: Vec<_> = rows
                        .iter()
                        .map(|&(p, v, ph, sh)| json!({"z": pair(p), "value": pair(v), "ph": opt(ph), "sh": opt(sh)}))
                        .collect();
                    pretty(&json!({"map": h.name(), "points": pts}))?
                }
            };
            emit(&io, &text)?;
        }

        Command::Norms { map: m, t, grid, format, io } => {
            let h = map(&m.map)?;
            let p = norm_profile(&*h, &t, &grid.grid())?;
            let text = match format {
                Format::Csv => p.to_csv(),
                Format::Json => pretty(&json!({"map": h.name(), "profile": p}))?,
            };
            emit(&io, &text)?;
        }

        Command::Horizon { map: m, level, t_max, grid, io } => {
            let h = map(&m.map)?;
            match tau0_scan(&*h, level.variant, level.k, &grid.grid(), t_max) {
                Ok(hz) => emit(&io, &pretty(&json!({"map": h.name(), "t_max": t_max, "horizon": hz}))?)?,
                Err(e) if no_horizon(&e) => {
                    let msg = e.to_string();
                    let report = json!({"map": h.name(), "variant": level.variant, "k": level.k, "t_max": t_max, "horizon": null, "message": msg});
                    emit(&io, &pretty(&report)?)?;
                    return Ok(Status::Fail(msg));
                }
                Err(e) => return Err(e.into()),
            }
        }

        Command::Evolve {
            map: m,
            level,
            s,
            t,
            z,
            rk_step,
            horizon,
            grid,
            format,
            io,
        } => {
            let h = map(&m.map)?;
            let f = field(&h, &level, &horizon, &grid.grid())?;
            let t = t.unwrap_or_else(|| f.tau0().min(0.05));
            let records = z
                .iter()
                .map(|&p| evolve_record(&f, s, t, p, rk_step))
                .collect::<Result<Vec<_>, _>>()?;
            let text = match format {
                Format::Csv => trace_csv(&records),
                Format::Json => pretty(&json!({"map": h.name(), "variant": level.variant, "k": level.k, "tau": f.tau0(), "records": records}))?,
            };
            emit(&io, &text)?;
        }

        Command::PdeCheck {
            map: m,
            level,
            samples,
            seed,
            pde_tol,
            disk_tol,
            horizon,
            grid,
            io,
        } => {
            let h = map(&m.map)?;
            let g = grid.grid();
            let tau = horizon_for(&h, &level, &horizon, &g)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut max_pde, mut max_disk) = (0.0f64, 0.0f64);
            for _ in 0..samples {
                let t = tau * (1.0 - rng.gen::<f64>());
                let x = 10f64.powf(rng.gen_range(-3.0..0.3));
                let y = rng.gen_range(-g.y_max..=g.y_max);
                let z = C64::new(x, y);
                max_pde = max_pde.max(pde_residual(&*h, level.variant, z, t)?);
                let p: C64 = herglotz_p_in(&*h, level.variant, z, t)?;
                let r = ((p - 1.0) / (p + 1.0)).norm();
                max_disk = max_disk.max((r - disk_radius(&*h, level.variant, z, t)?).abs());
            }
            let pass = max_pde <= pde_tol && max_disk <= disk_tol;
            let report = json!({
                "map": h.name(), "variant": level.variant, "k": level.k, "tau": tau,
                "samples": samples, "seed": seed,
                "max_pde_residual": max_pde, "max_disk_residual": max_disk,
                "pde_tol": pde_tol, "disk_tol": disk_tol, "pass": pass,
            });
            emit(&io, &pretty(&report)?)?;
            if !pass {
                return Ok(Status::Fail(format!("pde residual {max_pde}, disk residual {max_disk}")));
            }
        }

        Command::Extend {
            map: m,
            level,
            z,
            horizon,
            grid,
            format,
            io,
        } => {
            let h = map(&m.map)?;
            let tau = horizon_for(&h, &level, &horizon, &grid.grid())?;
            let mut rows = Vec::new();
            for &p in &z {
                let v = extend(&*h, level.variant, tau, p)?;
                let mu = if p.re < 0.0 {
                    mu_formula(&*h, level.variant, p)?
                } else {
                    C64::new(0.0, 0.0)
                };
                rows.push((p, v, mu));
            }
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("z_re,z_im,value_re,value_im,mu_re,mu_im\n");
                    for (p, v, mu) in &rows {
                        s.push_str(&row(&[p.re, p.im, v.re, v.im, mu.re, mu.im]));
                    }
                    s
                }
                Format::Json => {
                    let pts: Vec<_> = rows
                        .iter()
                        .map(|&(p, v, mu)| json!({"z": pair(p), "value": pair(v), "mu": pair(mu)}))
                        .collect();
                    pretty(&json!({"map": h.name(), "variant": level.variant, "tau": tau, "points": pts}))?
                }
            };
            emit(&io, &text)?;
        }

        Command::VerifyMu {
            map: m,
            level,
            fd_step,
            mu_tol,
            horizon,
            grid,
            io,
        } => {
            let h = map(&m.map)?;
            let opts = QcOptions {
                k: level.k,
                fd_step,
                mu_tol,
                tau: horizon.tau,
                grid: grid.grid(),
                scan_max: horizon.t_max,
            };
            let r = qc_report(&*h, level.variant, &opts)?;
            emit(&io, &pretty(&r)?)?;
            if !r.summary.pass {
                return Ok(Status::Fail(format!(
                    "max |mu| {} against bound {}, identity error {}",
                    r.summary.max_mu_formula, r.summary.mu_bound, r.summary.max_identity_err
                )));
            }
        }

        Command::TraceCheck {
            map: m,
            level,
            tol,
            horizon,
            grid,
            io,
        } => {
            let h = map(&m.map)?;
            let g = grid.grid();
            let tau = horizon_for(&h, &level, &horizon, &g)?;
            let pts = reflected_grid(&g, tau);
            let mut max_diff = 0.0f64;
            for &p in &pts {
                let a = trace_extend(&*h, level.variant, tau, p)?;
                let b = extend(&*h, level.variant, tau, p)?;
                max_diff = max_diff.max((a - b).norm());
            }
            let pass = max_diff <= tol;
            let report = json!({"map": h.name(), "variant": level.variant, "k": level.k, "tau": tau, "points": pts.len(), "max_diff": max_diff, "tol": tol, "pass": pass});
            emit(&io, &pretty(&report)?)?;
            if !pass {
                return Ok(Status::Fail(format!("trace differs from closed form by {max_diff}")));
            }
        }

        Command::Carleson {
            map: m,
            density,
            level,
            scales,
            positions,
            vanish_factor,
            rel_tol,
            horizon,
            grid,
            format,
            io,
        } => {
            let h = map(&m.map)?;
            let d = match density {
                DensityKind::Vmoa => vmoa_density(h),
                DensityKind::Mu => {
                    let tau = horizon_for(&h, &level, &horizon, &grid.grid())?;
                    mu_density(h, level.variant, tau)?
                }
            };
            let r = carleson_scan_with(&d, &scales, &positions, vanish_factor, rel_tol)?;
            let text = match format {
                Format::Csv => r.to_csv(),
                Format::Json => pretty(&r.summary_json())?,
            };
            emit(&io, &text)?;
        }

        Command::MuTilde {
            map: m,
            t,
            outer,
            center_y,
            length,
            rel_tol,
            tol,
            io,
        } => {
            let h = map(&m.map)?;
            let outer: Option<Arc<dyn OuterDilatation>> = match outer {
                OuterKind::None => None,
                OuterKind::Zero => Some(Arc::new(ZeroOuter)),
            };
            let mt = composite_mu_tilde(h.clone(), t, outer)?;
            if center_y.is_empty() || length.is_empty() {
                bail!("mu-tilde needs at least one center and one length");
            }
            let mut boxes = Vec::new();
            for &c in &center_y {
                for &l in &length {
                    boxes.push(big_box_check(&mt, c, l, rel_tol)?);
                }
            }
            let max_residual = boxes.iter().map(|b| b.residual).fold(0.0, f64::max);
            let pass = max_residual <= tol;
            emit(&io, &pretty(&json!({"map": h.name(), "t": t, "boxes": boxes, "max_residual": max_residual, "tol": tol, "pass": pass}))?)?;
            if !pass {
                return Ok(Status::Fail(format!("box split residual {max_residual}")));
            }
        }
    }
    Ok(Status::Pass)
}
