//! Subcommand implementations: each one computes, then writes deterministic
//! CSV/JSON (and optionally SVG) artifacts into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use bef_core::boundary::{self, BoundaryProfile, DecayFits, SolverContext};
use bef_core::inequalities::{self, GapKappaRow, IneqError, InequalityReport, PauliAxis};
use bef_core::model::{build_hamiltonian, SiteOrdering};
use serde::{Deserialize, Serialize};

use crate::config::{sanitize_stem, ExperimentConfig, OutputFormat};
use crate::plot;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveRow {
    pub model_id: String,
    pub ordering: String,
    pub n: usize,
    pub energy: f64,
    pub gap: f64,
    pub gap_second: f64,
    pub residual: f64,
    pub iterations: usize,
    pub degenerate: bool,
    pub j_norm: f64,
}

/// Every JSON artifact is tagged with its kind so `report` can collate a
/// directory of results without guessing.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Artifact {
    Solve {
        model_id: String,
        rows: Vec<SolveRow>,
    },
    MuProfile {
        profile: BoundaryProfile,
        fits: Option<DecayFits>,
    },
    EtaScan {
        model_id: String,
        reports: Vec<InequalityReport>,
    },
    Correlations {
        model_id: String,
        reports: Vec<InequalityReport>,
    },
    EntropyScan {
        model_id: String,
        m: usize,
        series: Vec<(usize, f64)>,
        reports: Vec<InequalityReport>,
        skipped: Vec<String>,
        area: Option<InequalityReport>,
    },
    GapScan {
        model_id: String,
        parameter: String,
        rows: Vec<GapKappaRow>,
    },
    Verify {
        model_id: String,
        reports: Vec<InequalityReport>,
        skipped: Vec<String>,
        all_pass: bool,
    },
    Summary {
        artifacts: Vec<String>,
        total_reports: usize,
        failures: usize,
        all_pass: bool,
    },
}

pub struct Runner {
    config: ExperimentConfig,
    ctx: SolverContext,
    out_dir: PathBuf,
}

fn fnum(v: f64) -> String {
    format!("{v}")
}

impl Runner {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let out_dir = config.output.directory.clone();
        let ctx = SolverContext::new(config.lanczos_options());
        Ok(Self {
            config,
            ctx,
            out_dir,
        })
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.config.output.formats.contains(&f)
    }

    fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating {}", self.out_dir.display()))?;
        let path = self.out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn write_json(&self, stem: &str, artifact: &Artifact) -> Result<()> {
        if self.wants(OutputFormat::Json) {
            let text = serde_json::to_string_pretty(artifact)?;
            let path = self.write_text(&format!("{stem}.json"), &(text + "\n"))?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn write_csv(&self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        if self.wants(OutputFormat::Csv) {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            let bytes = w.into_inner()?;
            let path = self.write_text(&format!("{stem}.csv"), &String::from_utf8(bytes)?)?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn write_svg(&self, stem: &str, text: &str) -> Result<()> {
        if self.wants(OutputFormat::Svg) {
            let path = self.write_text(&format!("{stem}.svg"), text)?;
            eprintln!("wrote {}", path.display());
        }
        Ok(())
    }

    fn model_stem(&self, prefix: &str) -> String {
        format!(
            "{prefix}_{}",
            sanitize_stem(&self.config.model.display_id())
        )
    }

    pub fn solve(&self) -> Result<i32> {
        let (n_min, n_max) = self.config.ranges.n;
        let spec = &self.config.model;
        let ordering = self.config.ordering;
        let mut rows = Vec::new();
        for n in n_min..=n_max {
            let sol = self
                .ctx
                .ground_full(spec, ordering, n)
                .map_err(|e| anyhow!("solve failed at n = {n}: {e}"))?;
            let j_norm = build_hamiltonian(spec, n, ordering)?.max_site_term_norm();
            rows.push(SolveRow {
                model_id: spec.display_id(),
                ordering: ordering.to_string(),
                n,
                energy: sol.energy,
                gap: sol.gap,
                gap_second: sol.gap_second,
                residual: sol.residual,
                iterations: sol.iterations,
                degenerate: sol.degenerate,
                j_norm,
            });
        }
        let stem = self.model_stem("solve");
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.model_id.clone(),
                    r.ordering.clone(),
                    r.n.to_string(),
                    fnum(r.energy),
                    fnum(r.gap),
                    fnum(r.gap_second),
                    fnum(r.residual),
                    r.iterations.to_string(),
                    r.degenerate.to_string(),
                    fnum(r.j_norm),
                ]
            })
            .collect();
        self.write_csv(
            &stem,
            &[
                "model_id",
                "ordering",
                "n",
                "energy",
                "gap",
                "gap_second",
                "residual",
                "iterations",
                "degenerate",
                "j_norm",
            ],
            &csv_rows,
        )?;
        self.write_json(
            &stem,
            &Artifact::Solve {
                model_id: spec.display_id(),
                rows,
            },
        )?;
        Ok(0)
    }

    pub fn mu_profile(&self) -> Result<i32> {
        let spec = &self.config.model;
        let profile = boundary::boundary_profile(
            &self.ctx,
            spec,
            self.config.ordering,
            self.config.ranges.n,
            self.config.ranges.r,
        )?;
        let fits = match boundary::fit_decay(&profile) {
            Ok(f) => Some(f),
            Err(boundary::BoundaryError::InsufficientPoints { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let stem = self.model_stem("mu_profile");
        let csv_rows: Vec<Vec<String>> = profile
            .entries
            .iter()
            .map(|e| {
                vec![
                    profile.model_id.clone(),
                    profile.ordering.to_string(),
                    e.n.to_string(),
                    e.r.to_string(),
                    fnum(e.mu),
                ]
            })
            .collect();
        self.write_csv(&stem, &["model_id", "ordering", "n", "r", "mu"], &csv_rows)?;
        let svg = plot::mu_profile_svg(
            &[plot::Series {
                label: profile.model_id.clone(),
                points: profile
                    .mu_hat
                    .iter()
                    .map(|(&r, &mu)| (r as f64, mu))
                    .collect(),
            }],
            profile.noise_floor,
        );
        self.write_svg(&stem, &svg)?;
        self.write_json(&stem, &Artifact::MuProfile { profile, fits })?;
        Ok(0)
    }

    pub fn eta_scan(&self) -> Result<i32> {
        let spec = &self.config.model;
        let params = self
            .config
            .suites
            .eta_scan
            .as_ref()
            .ok_or_else(|| anyhow!("config has no [suites.eta_scan] block"))?;
        let (n_min, n_max) = self.config.ranges.n;
        let mut reports = Vec::new();
        for n in n_min..=n_max {
            if params.m >= n {
                continue;
            }
            reports.push(inequalities::verify_eta_mu_sandwich(
                &self.ctx,
                spec,
                self.config.ordering,
                n,
                params.m,
                inequalities::INEQUALITY_TOL,
            )?);
        }
        let stem = self.model_stem("eta_scan");
        let csv_rows: Vec<Vec<String>> = reports
            .iter()
            .map(|r| {
                vec![
                    spec.display_id(),
                    self.config.ordering.to_string(),
                    r.instance.clone(),
                    fnum(r.details["eta"]),
                    fnum(r.details["mu"]),
                    fnum(r.details["lower"]),
                    fnum(r.details["upper"]),
                    fnum(r.margin),
                    r.pass.to_string(),
                ]
            })
            .collect();
        self.write_csv(
            &stem,
            &[
                "model_id", "ordering", "instance", "eta", "mu", "lower", "upper", "margin",
                "pass",
            ],
            &csv_rows,
        )?;
        self.write_json(
            &stem,
            &Artifact::EtaScan {
                model_id: spec.display_id(),
                reports,
            },
        )?;
        Ok(0)
    }

    fn pauli_pairs(&self) -> Result<Vec<(PauliAxis, PauliAxis)>> {
        let requested = self
            .config
            .suites
            .correlations
            .as_ref()
            .map(|c| c.pauli_pairs.clone())
            .unwrap_or_default();
        if requested.is_empty() {
            let mut all = Vec::new();
            for a in PauliAxis::ALL {
                for b in PauliAxis::ALL {
                    all.push((a, b));
                }
            }
            return Ok(all);
        }
        requested
            .iter()
            .map(|s| {
                let chars: Vec<char> = s.trim().chars().collect();
                if chars.len() != 2 {
                    bail!("pauli pair '{s}' must be two letters like ZZ");
                }
                let a: PauliAxis = chars[0].to_string().parse().map_err(|e| anyhow!("{e}"))?;
                let b: PauliAxis = chars[1].to_string().parse().map_err(|e| anyhow!("{e}"))?;
                Ok((a, b))
            })
            .collect()
    }

    pub fn correlations(&self) -> Result<i32> {
        let spec = &self.config.model;
        let SiteOrdering::Bridge { left } = self.config.ordering else {
            bail!("the correlations suite needs ordering.mode = \"bridge\"");
        };
        let n = self.config.ranges.n.1;
        let (r_min, r_max) = self.config.ranges.r;
        let pairs = self.pauli_pairs()?;
        let mut reports = Vec::new();
        for r in r_min..=r_max {
            if r > left || left + 1 + r > n {
                continue;
            }
            for &(p1, p2) in &pairs {
                reports.push(inequalities::verify_correlation_bound(
                    &self.ctx,
                    spec,
                    left,
                    n,
                    r,
                    p1,
                    p2,
                    inequalities::INEQUALITY_TOL,
                )?);
            }
        }
        if reports.is_empty() {
            bail!("no radius in ranges.r fits the bridge geometry (left = {left}, n = {n})");
        }
        let stem = self.model_stem("correlations");
        let csv_rows: Vec<Vec<String>> = reports
            .iter()
            .map(|r| {
                vec![
                    spec.display_id(),
                    r.instance.clone(),
                    fnum(r.lhs),
                    fnum(r.rhs),
                    fnum(r.details["mu"]),
                    fnum(r.margin),
                    r.pass.to_string(),
                ]
            })
            .collect();
        self.write_csv(
            &stem,
            &["model_id", "instance", "lhs", "rhs", "mu", "margin", "pass"],
            &csv_rows,
        )?;
        self.write_json(
            &stem,
            &Artifact::Correlations {
                model_id: spec.display_id(),
                reports,
            },
        )?;
        Ok(0)
    }

    pub fn entropy_scan(&self) -> Result<i32> {
        let spec = &self.config.model;
        let params = self
            .config
            .suites
            .entropy_scan
            .as_ref()
            .ok_or_else(|| anyhow!("config has no [suites.entropy_scan] block"))?;
        let (n_min, n_max) = self.config.ranges.n;
        let sizes: Vec<usize> = (n_min..=n_max).collect();
        let series = inequalities::entropy_series(
            &self.ctx,
            spec,
            self.config.ordering,
            params.m,
            &sizes,
        )?;
        let mut reports = Vec::new();
        let mut skipped = Vec::new();
        for s in n_min.max(params.m + 2)..=n_max {
            match inequalities::verify_entropy_increment(
                &self.ctx,
                spec,
                self.config.ordering,
                params.m,
                s,
                inequalities::INEQUALITY_TOL,
            ) {
                Ok(report) => reports.push(report),
                Err(IneqError::EtaTooLarge { eta }) => {
                    skipped.push(format!("s={s}: eta={eta:.6} outside binary-entropy domain"));
                }
                Err(e) => return Err(e.into()),
            }
        }
        let area = if params.m + params.q < n_max {
            Some(inequalities::verify_area_law_accumulation(
                &self.ctx,
                spec,
                self.config.ordering,
                params.m,
                params.q,
                n_max,
                inequalities::INEQUALITY_TOL,
            )?)
        } else {
            None
        };
        let stem = self.model_stem("entropy_scan");
        let mut csv_rows: Vec<Vec<String>> = series
            .iter()
            .map(|(s, ent)| {
                vec![
                    spec.display_id(),
                    self.config.ordering.to_string(),
                    params.m.to_string(),
                    s.to_string(),
                    fnum(*ent),
                    String::new(),
                    String::new(),
                    String::new(),
                ]
            })
            .collect();
        for r in &reports {
            csv_rows.push(vec![
                spec.display_id(),
                self.config.ordering.to_string(),
                params.m.to_string(),
                r.instance.clone(),
                fnum(r.details["entropy_bits"]),
                fnum(r.lhs),
                fnum(r.rhs),
                r.pass.to_string(),
            ]);
        }
        self.write_csv(
            &stem,
            &[
                "model_id",
                "ordering",
                "m",
                "s",
                "entropy_bits",
                "increment_lhs",
                "increment_rhs",
                "pass",
            ],
            &csv_rows,
        )?;
        let svg = plot::entropy_svg(&[plot::Series {
            label: spec.display_id(),
            points: series.iter().map(|&(s, e)| (s as f64, e)).collect(),
        }]);
        self.write_svg(&stem, &svg)?;
        self.write_json(
            &stem,
            &Artifact::EntropyScan {
                model_id: spec.display_id(),
                m: params.m,
                series,
                reports,
                skipped,
                area,
            },
        )?;
        Ok(0)
    }

    pub fn gap_scan(&self) -> Result<i32> {
        let spec = &self.config.model;
        let params = self
            .config
            .suites
            .gap_scan
            .as_ref()
            .ok_or_else(|| anyhow!("config has no [suites.gap_scan] block"))?;
        let rows = inequalities::gap_vs_kappa_scan(
            &self.ctx,
            spec,
            &params.parameter,
            &params.values,
            self.config.ordering,
            self.config.ranges.n,
            self.config.ranges.r,
        )?;
        let stem = self.model_stem("gap_scan");
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.model_id.clone(),
                    r.parameter.clone(),
                    fnum(r.value),
                    fnum(r.gap),
                    r.kappa.map(fnum).unwrap_or_else(|| "inf".into()),
                    r.rms_log_residual_exp
                        .map(fnum)
                        .unwrap_or_default(),
                    r.rms_log_residual_pow
                        .map(fnum)
                        .unwrap_or_default(),
                    r.preferred
                        .map(|p| p.to_string())
                        .unwrap_or_default(),
                    r.degenerate.to_string(),
                ]
            })
            .collect();
        self.write_csv(
            &stem,
            &[
                "model_id",
                "parameter",
                "value",
                "gap",
                "kappa",
                "rms_exp",
                "rms_pow",
                "preferred",
                "degenerate",
            ],
            &csv_rows,
        )?;
        let svg = plot::gap_kappa_svg(
            &rows
                .iter()
                .map(|r| (format!("{}={}", r.parameter, r.value), r.gap, r.kappa))
                .collect::<Vec<_>>(),
        );
        self.write_svg(&stem, &svg)?;
        self.write_json(
            &stem,
            &Artifact::GapScan {
                model_id: spec.display_id(),
                parameter: params.parameter.clone(),
                rows,
            },
        )?;
        Ok(0)
    }

    /// Run every configured verification suite; exit nonzero iff any report
    /// fails. Instances outside an inequality's domain are listed as skipped
    /// rather than failed.
    pub fn verify(&self) -> Result<i32> {
        let spec = &self.config.model;
        let ordering = self.config.ordering;
        let (n_min, n_max) = self.config.ranges.n;
        let mut reports: Vec<InequalityReport> = Vec::new();
        let mut skipped: Vec<String> = Vec::new();

        if let Some(params) = &self.config.suites.eta_scan {
            for n in n_min..=n_max {
                if params.m >= n {
                    continue;
                }
                reports.push(inequalities::verify_eta_mu_sandwich(
                    &self.ctx,
                    spec,
                    ordering,
                    n,
                    params.m,
                    inequalities::INEQUALITY_TOL,
                )?);
            }
        }
        if let SiteOrdering::Bridge { left } = ordering {
            if self.config.suites.correlations.is_some() {
                let n = n_max;
                let (r_min, r_max) = self.config.ranges.r;
                for r in r_min..=r_max {
                    if r > left || left + 1 + r > n {
                        continue;
                    }
                    for (p1, p2) in self.pauli_pairs()? {
                        reports.push(inequalities::verify_correlation_bound(
                            &self.ctx,
                            spec,
                            left,
                            n,
                            r,
                            p1,
                            p2,
                            inequalities::INEQUALITY_TOL,
                        )?);
                    }
                }
            }
        }
        if let Some(params) = &self.config.suites.entropy_scan {
            for s in n_min.max(params.m + 2)..=n_max {
                match inequalities::verify_entropy_increment(
                    &self.ctx,
                    spec,
                    ordering,
                    params.m,
                    s,
                    inequalities::INEQUALITY_TOL,
                ) {
                    Ok(report) => reports.push(report),
                    Err(IneqError::EtaTooLarge { eta }) => {
                        skipped.push(format!("entropy_increment s={s}: eta={eta:.6}"));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if params.m + params.q < n_max {
                reports.push(inequalities::verify_area_law_accumulation(
                    &self.ctx,
                    spec,
                    ordering,
                    params.m,
                    params.q,
                    n_max,
                    inequalities::INEQUALITY_TOL,
                )?);
            }
        }
        if reports.is_empty() {
            bail!("no verification suite is configured; add [suites.*] blocks");
        }
        reports.sort_by(|a, b| (a.name.to_string(), &a.instance).cmp(&(b.name.to_string(), &b.instance)));
        let all_pass = reports.iter().all(|r| r.pass);
        for r in &reports {
            println!(
                "{:<24} {:<48} lhs={:<12.6e} rhs={:<12.6e} {}",
                r.name.to_string(),
                r.instance,
                r.lhs,
                r.rhs,
                if r.pass { "pass" } else { "FAIL" }
            );
        }
        for s in &skipped {
            println!("skipped: {s}");
        }
        let stem = self.model_stem("verify");
        let csv_rows: Vec<Vec<String>> = reports
            .iter()
            .map(|r| {
                vec![
                    r.name.to_string(),
                    r.instance.clone(),
                    fnum(r.lhs),
                    fnum(r.rhs),
                    fnum(r.margin),
                    r.pass.to_string(),
                    fnum(r.tol),
                ]
            })
            .collect();
        self.write_csv(
            &stem,
            &["name", "instance", "lhs", "rhs", "margin", "pass", "tol"],
            &csv_rows,
        )?;
        self.write_json(
            &stem,
            &Artifact::Verify {
                model_id: spec.display_id(),
                reports,
                skipped,
                all_pass,
            },
        )?;
        Ok(if all_pass { 0 } else { 1 })
    }

}

pub fn report_directory(dir: &Path) -> Result<i32> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .filter(|p| p.file_name().is_some_and(|f| f != "summary.json"))
        .collect();
    names.sort();
    let mut artifacts: Vec<(String, Artifact)> = Vec::new();
    for path in &names {
        let text = fs::read_to_string(path)?;
        match serde_json::from_str::<Artifact>(&text) {
            Ok(a) => artifacts.push((
                path.file_name().unwrap().to_string_lossy().into_owned(),
                a,
            )),
            Err(_) => eprintln!("skipping foreign json {}", path.display()),
        }
    }
    if artifacts.is_empty() {
        bail!(
            "missing input: no readable artifacts in {} (run a compute subcommand first)",
            dir.display()
        );
    }
    let mut total = 0usize;
    let mut failures = 0usize;
    let mut profiles: Vec<plot::Series> = Vec::new();
    let mut floor = 1e-7f64;
    let mut gap_points: Vec<(String, f64, Option<f64>)> = Vec::new();
    let mut entropy_sets: Vec<plot::Series> = Vec::new();
    for (_, artifact) in &artifacts {
        match artifact {
            Artifact::MuProfile { profile, .. } => {
                floor = profile.noise_floor;
                profiles.push(plot::Series {
                    label: profile.model_id.clone(),
                    points: profile
                        .mu_hat
                        .iter()
                        .map(|(&r, &mu)| (r as f64, mu))
                        .collect(),
                });
            }
            Artifact::GapScan { rows, .. } => {
                for r in rows {
                    gap_points.push((
                        format!("{}={}", r.parameter, r.value),
                        r.gap,
                        r.kappa,
                    ));
                }
            }
            Artifact::EntropyScan {
                model_id, series, ..
            } => {
                entropy_sets.push(plot::Series {
                    label: model_id.clone(),
                    points: series.iter().map(|&(s, e)| (s as f64, e)).collect(),
                });
            }
            _ => {}
        }
        for r in collect_reports(artifact) {
            total += 1;
            if !r.pass {
                failures += 1;
            }
        }
    }
    if !profiles.is_empty() {
        let svg = plot::mu_profile_svg(&profiles, floor);
        fs::write(dir.join("mu_profiles.svg"), svg)?;
        eprintln!("wrote {}", dir.join("mu_profiles.svg").display());
    }
    if !gap_points.is_empty() {
        fs::write(dir.join("gap_kappa.svg"), plot::gap_kappa_svg(&gap_points))?;
        eprintln!("wrote {}", dir.join("gap_kappa.svg").display());
    }
    if !entropy_sets.is_empty() {
        fs::write(dir.join("entropy_growth.svg"), plot::entropy_svg(&entropy_sets))?;
        eprintln!("wrote {}", dir.join("entropy_growth.svg").display());
    }
    let summary = Artifact::Summary {
        artifacts: artifacts.iter().map(|(n, _)| n.clone()).collect(),
        total_reports: total,
        failures,
        all_pass: failures == 0,
    };
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    fs::write(dir.join("summary.json"), text)?;
    eprintln!("wrote {}", dir.join("summary.json").display());
    println!(
        "collated {} artifacts, {} reports, {} failures",
        artifacts.len(),
        total,
        failures
    );
    Ok(0)
}

fn collect_reports(artifact: &Artifact) -> Vec<&InequalityReport> {
    match artifact {
        Artifact::EtaScan { reports, .. }
        | Artifact::Correlations { reports, .. }
        | Artifact::Verify { reports, .. } => reports.iter().collect(),
        Artifact::EntropyScan { reports, area, .. } => {
            let mut all: Vec<&InequalityReport> = reports.iter().collect();
            if let Some(a) = area {
                all.push(a);
            }
            all
        }
        _ => Vec::new(),
    }
}

