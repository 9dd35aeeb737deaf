use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;
use sigtamper_core::export::{
    frontier_points, read_frontier_csv, write_file, write_flow_csv, write_frontier_csv,
    write_normalized_csv, write_provenance_jsonl, write_reports_csv, write_witnesses_jsonl,
};
use sigtamper_core::oracle::{OracleError, DEFAULT_LIMIT};
use sigtamper_core::{
    baseline, brute_force_frontier, frontier_audit, pareto_frontier, summarize, AdversaryError,
    ArcClass, DemandSpec, GridKind, Instance, NetworkSpec, OptimalSolution, ParetoFrontier,
    RunSettings, ScenarioConfig, SuperGraph, VulnerabilityReport,
};

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::{Cli, Command};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?
        .install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate {
            network,
            demand,
            steps,
        } => generate(cli, network, *demand, *steps),
        Command::Expand { scenario } => expand_stats(cli, scenario),
        Command::SolveOptimal { scenario } => solve_optimal(cli, scenario),
        Command::Attack {
            scenario,
            oracle_check,
        } => attack(cli, scenario, *oracle_check),
        Command::Vuln { frontiers } => vuln(cli, frontiers),
        Command::Sweep {
            networks,
            demands,
            durations,
            scenario,
        } => sweep(cli, networks, demands, durations, scenario.as_deref()),
    }
}

/// `D` without a seed takes `--seed`, defaulting to 1.
fn parse_network(s: &str, seed: Option<u64>) -> Result<NetworkSpec, CliError> {
    if s == "D" {
        return Ok(NetworkSpec::Irregular {
            seed: seed.unwrap_or(1),
        });
    }
    Ok(s.parse()?)
}

fn load(path: &Path) -> Result<(ScenarioConfig, Instance), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let cfg = ScenarioConfig::from_json(&text)?;
    let inst = cfg.instantiate(path.parent())?;
    Ok((cfg, inst))
}

fn write_text(path: &Path, text: String) -> Result<(), CliError> {
    Ok(write_file(path, |buf| {
        buf.extend_from_slice(text.as_bytes());
        Ok(())
    })?)
}

fn write_json(path: &Path, value: serde_json::Value) -> Result<(), CliError> {
    write_text(
        path,
        serde_json::to_string_pretty(&value).expect("json serializes") + "\n",
    )
}

fn record_seed(m: &mut RunManifest, spec: &NetworkSpec) {
    if let NetworkSpec::Irregular { seed } = spec {
        m.seeds.insert(spec.label(), *seed);
    }
}

fn generate(cli: &Cli, network: &str, demand: u32, steps: u32) -> Result<(), CliError> {
    let spec = parse_network(network, cli.seed)?;
    let mut m = RunManifest::new(&cli.out, None);
    record_seed(&mut m, &spec);
    let cfg = ScenarioConfig::uniform(spec, steps, demand);
    let inst = m.time("generate", || cfg.instantiate(None))?;
    write_text(&m.artifact("network.json"), inst.network.to_json() + "\n")?;
    let mut file_cfg = cfg.clone();
    file_cfg.network = NetworkSpec::File {
        path: "network.json".into(),
    };
    write_text(&m.artifact("scenario.json"), file_cfg.to_json() + "\n")?;
    let summary = serde_json::to_value(summarize(&inst.network)).expect("summary serializes");
    write_json(&m.artifact("summary.json"), summary)?;
    m.write()
}

fn expand_stats(cli: &Cli, scenario: &Path) -> Result<(), CliError> {
    let mut m = RunManifest::new(&cli.out, Some(scenario));
    let (cfg, inst) = load(scenario)?;
    record_seed(&mut m, &cfg.network);
    let g = m.time("expand", || inst.expand())?;
    let mut by_class: BTreeMap<&str, usize> = BTreeMap::new();
    for k in g.keys() {
        *by_class.entry(k.class.as_str()).or_insert(0) += 1;
    }
    let stats = json!({
        "label": inst.label,
        "steps": g.horizon().steps,
        "nodes": g.node_count(),
        "arcs": g.arc_count(),
        "arcs_by_class": by_class,
        "conflict_arcs": g.conflict_arcs().len(),
        "total_demand": g.total_demand(),
    });
    println!("{stats}");
    write_json(&m.artifact("expand.json"), stats)?;
    m.write()
}

fn solve(m: &mut RunManifest, inst: &Instance) -> Result<(SuperGraph, OptimalSolution), CliError> {
    let g = m.time("expand", || inst.expand())?;
    let opt = m.time("optimal_control", || baseline(&g))?;
    Ok((g, opt))
}

fn solve_optimal(cli: &Cli, scenario: &Path) -> Result<(), CliError> {
    let mut m = RunManifest::new(&cli.out, Some(scenario));
    let (cfg, inst) = load(scenario)?;
    record_seed(&mut m, &cfg.network);
    let (g, opt) = solve(&mut m, &inst)?;
    let flow_path = m.artifact("optimal_flow.csv");
    write_file(&flow_path, |buf| write_flow_csv(&g, &opt.flow.flow, buf))?;
    write_text(&m.artifact("schedule.csv"), opt.schedule.to_csv(&g))?;
    let summary = json!({
        "label": inst.label,
        "total_travel_time": opt.total_travel_time,
        "throughput": opt.throughput(),
        "switches": opt.schedule.switch_count(),
        "switches_before_reduction": opt.raw_schedule.switch_count(),
        "throughput_curve": opt.throughput_curve,
        "residual_arcs": g.keys().iter().filter(|k| k.class == ArcClass::Residual).count(),
    });
    println!(
        "travel time {}, throughput {}",
        opt.total_travel_time,
        opt.throughput()
    );
    write_json(&m.artifact("optimal.json"), summary)?;
    m.write()
}

/// Frontier of one instance, rejected unless its audit is clean.
fn frontier_of(g: &SuperGraph, opt: &OptimalSolution) -> Result<ParetoFrontier, CliError> {
    let f = pareto_frontier(g, opt)?;
    let audit = frontier_audit(&f, Some((g, opt)));
    if !audit.is_clean() {
        return Err(CliError::Internal(format!(
            "frontier audit failed: {:?}",
            audit.issues
        )));
    }
    Ok(f)
}

fn write_frontier_files(
    m: &mut RunManifest,
    prefix: &str,
    f: &ParetoFrontier,
    report: &VulnerabilityReport,
) -> Result<(), CliError> {
    let name = |file: &str| format!("{prefix}{file}");
    write_file(&m.artifact(&name("frontier.csv")), |buf| {
        write_frontier_csv(f, buf)
    })?;
    write_file(&m.artifact(&name("witnesses.jsonl")), |buf| {
        write_witnesses_jsonl(f, buf)
    })?;
    write_file(&m.artifact(&name("provenance.jsonl")), |buf| {
        write_provenance_jsonl(&f.provenance, buf)
    })?;
    write_file(&m.artifact(&name("normalized.csv")), |buf| {
        write_normalized_csv(&report.normalized_points, buf)
    })?;
    Ok(())
}

fn settings(cfg: &ScenarioConfig, label: &str) -> RunSettings {
    RunSettings {
        network: label.to_string(),
        demand_veh_per_hr: cfg.demand_rate().unwrap_or(0),
        horizon_steps: cfg.horizon_steps,
    }
}

fn attack(cli: &Cli, scenario: &Path, oracle_check: bool) -> Result<(), CliError> {
    let mut m = RunManifest::new(&cli.out, Some(scenario));
    let (cfg, inst) = load(scenario)?;
    record_seed(&mut m, &cfg.network);
    let (g, opt) = solve(&mut m, &inst)?;
    let f = m.time("pareto_frontier", || frontier_of(&g, &opt))?;
    let report = VulnerabilityReport::new(&inst.label, settings(&cfg, &inst.label), &f);
    write_frontier_files(&mut m, "", &f, &report)?;
    write_file(&m.artifact("report.csv"), |buf| {
        write_reports_csv(std::slice::from_ref(&report), buf)
    })?;
    println!("frontier {:?}", f.values());
    if oracle_check {
        let result = m.time("oracle", || brute_force_frontier(&g, &opt, DEFAULT_LIMIT));
        let (status, oracle) = match result {
            Ok(bf) if bf.points == f.values() => ("match", Some(bf.points)),
            Ok(bf) => ("mismatch", Some(bf.points)),
            Err(AdversaryError::Oracle(OracleError::TooLarge(_))) => ("skipped", None),
            Err(e) => return Err(e.into()),
        };
        write_json(
            &m.artifact("oracle.json"),
            json!({ "status": status, "frontier": f.values(), "oracle": oracle }),
        )?;
        println!("oracle check: {status}");
        if status == "mismatch" {
            m.write()?;
            return Err(CliError::Internal(format!(
                "frontier {:?} differs from oracle {:?}",
                f.values(),
                oracle.unwrap_or_default()
            )));
        }
    }
    m.write()
}

/// File stem, or the parent directory's name for files called `frontier`.
fn frontier_label(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if stem != "frontier" {
        return stem;
    }
    path.parent()
        .and_then(Path::file_name)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or(stem)
}

fn vuln(cli: &Cli, paths: &[PathBuf]) -> Result<(), CliError> {
    let mut m = RunManifest::new(&cli.out, None);
    let mut reports: Vec<VulnerabilityReport> = Vec::new();
    for path in paths {
        let file =
            File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let rows = read_frontier_csv(file)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let label = frontier_label(path);
        if reports.iter().any(|r| r.label == label) {
            return Err(CliError::Input(format!(
                "duplicate frontier label {label:?}"
            )));
        }
        let settings = RunSettings {
            network: label.clone(),
            demand_veh_per_hr: 0,
            horizon_steps: 0,
        };
        reports.push(VulnerabilityReport::from_points(
            label,
            settings,
            &frontier_points(&rows),
        ));
    }
    for r in &reports {
        write_file(&m.artifact(&format!("normalized/{}.csv", r.label)), |buf| {
            write_normalized_csv(&r.normalized_points, buf)
        })?;
        println!(
            "{}: m={} concavity_index={}",
            r.label,
            r.m.map_or("none".into(), |v| v.to_string()),
            r.concavity_index.map_or("none".into(), |v| v.to_string())
        );
    }
    write_file(&m.artifact("reports.csv"), |buf| {
        write_reports_csv(&reports, buf)
    })?;
    m.write()
}

struct JobResult {
    dir: String,
    report: VulnerabilityReport,
    frontier: ParetoFrontier,
    elapsed_ms: u128,
}

fn sweep(
    cli: &Cli,
    networks: &[String],
    demands: &[u32],
    durations: &[u32],
    scenario: Option<&Path>,
) -> Result<(), CliError> {
    let mut m = RunManifest::new(&cli.out, scenario);
    let base = match scenario {
        Some(p) => load(p)?.0,
        None => ScenarioConfig::uniform(NetworkSpec::Grid { kind: GridKind::A }, 1, 0),
    };
    let mut jobs = Vec::new();
    for net in networks {
        let spec = parse_network(net, cli.seed)?;
        record_seed(&mut m, &spec);
        for &d in demands {
            for &t in durations {
                let mut cfg = base.clone();
                cfg.network = spec.clone();
                cfg.demand = DemandSpec::Uniform { veh_per_hr: d };
                cfg.horizon_steps = t;
                let tag = match &spec {
                    NetworkSpec::Irregular { seed } => format!("D{seed}"),
                    other => other.label(),
                };
                jobs.push((format!("{tag}-{d}-{t}"), cfg));
            }
        }
    }
    let results: Vec<Result<JobResult, CliError>> = jobs
        .par_iter()
        .map(|(dir, cfg)| {
            let started = Instant::now();
            let inst = cfg.instantiate(scenario.and_then(Path::parent))?;
            let g = inst.expand()?;
            let opt = baseline(&g)?;
            let frontier = frontier_of(&g, &opt)?;
            let report =
                VulnerabilityReport::new(dir.clone(), settings(cfg, &inst.label), &frontier);
            eprintln!("{dir}: {:?}", frontier.values());
            Ok(JobResult {
                dir: dir.clone(),
                report,
                frontier,
                elapsed_ms: started.elapsed().as_millis(),
            })
        })
        .collect();
    let mut reports = Vec::new();
    for r in results {
        let r = r?;
        write_frontier_files(&mut m, &format!("{}/", r.dir), &r.frontier, &r.report)?;
        m.timings_ms.insert(r.dir.clone(), r.elapsed_ms);
        reports.push(r.report);
    }
    write_file(&m.artifact("reports.csv"), |buf| {
        write_reports_csv(&reports, buf)
    })?;
    m.write()
}
