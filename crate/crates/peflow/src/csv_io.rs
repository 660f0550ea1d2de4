//! Trajectory and event CSV export and import.
//!
//! Both files start with `# config_hash: <hex>`; the trajectory file also
//! carries a `# provenance: <json>` line. Floats are written with 17
//! significant digits so reading a file back reproduces the map exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use peflow_core::trajectory::ClusterRecord;
use peflow_core::{
    ClusterId, DiscreteMeasure, Frame, FrameKind, MergeEvent, Model, Provenance, TrajectoryMap,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const EVENTS_FILE: &str = "events.csv";

const TRAJECTORY_HEADER: [&str; 7] = ["t", "cluster_id", "mass", "position", "velocity", "members", "kind"];
const EVENTS_HEADER: [&str; 8] =
    ["t", "participants", "v_pre", "v_post", "result", "position", "masses", "gap_residual"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

fn kind_name(kind: FrameKind) -> &'static str {
    match kind {
        FrameKind::Initial => "initial",
        FrameKind::Step => "step",
        FrameKind::Output => "output",
        FrameKind::PreEvent => "pre_event",
        FrameKind::PostEvent => "post_event",
    }
}

fn parse_kind(s: &str) -> Option<FrameKind> {
    Some(match s {
        "initial" => FrameKind::Initial,
        "step" => FrameKind::Step,
        "output" => FrameKind::Output,
        "pre_event" => FrameKind::PreEvent,
        "post_event" => FrameKind::PostEvent,
        _ => return None,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvenanceRecord {
    model: String,
    interaction: String,
    semiconvexity: f64,
    gap_tol: f64,
    t_tol: f64,
    horizon: f64,
}

fn model_name(m: Model) -> &'static str {
    match m {
        Model::PressurelessEuler => "pressureless_euler",
        Model::EulerPoisson => "euler_poisson",
    }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::artifact(path, e)
}

pub fn write_trajectory(path: &Path, tm: &TrajectoryMap, hash: &str) -> Result<(), CliError> {
    let mut out = create(path)?;
    let prov = tm.provenance();
    let record = ProvenanceRecord {
        model: model_name(prov.model).into(),
        interaction: prov.interaction.clone(),
        semiconvexity: prov.semiconvexity,
        gap_tol: prov.gap_tol,
        t_tol: prov.t_tol,
        horizon: tm.horizon(),
    };
    let prov_json = serde_json::to_string(&serde_json::to_value(&record).expect("provenance serialises"))
        .expect("JSON value serialises");
    writeln!(out, "# config_hash: {hash}").map_err(|e| CliError::io(path, e))?;
    writeln!(out, "# provenance: {prov_json}").map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(TRAJECTORY_HEADER).map_err(csv_err(path))?;
    for k in 0..tm.frames().len() {
        let kind = kind_name(tm.frames()[k].kind);
        let t = fmt_f64(tm.frames()[k].time);
        for c in tm.frame_clusters(k) {
            let members = join(&c.members.clone().collect::<Vec<_>>(), |i| i.to_string());
            w.write_record([
                t.as_str(),
                &c.id.0.to_string(),
                &fmt_f64(c.mass),
                &fmt_f64(c.position),
                &fmt_f64(c.velocity),
                &members,
                kind,
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    drop(w);
    out.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_events(path: &Path, tm: &TrajectoryMap, hash: &str) -> Result<(), CliError> {
    let mut out = create(path)?;
    writeln!(out, "# config_hash: {hash}").map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(EVENTS_HEADER).map_err(csv_err(path))?;
    for e in tm.events() {
        w.write_record([
            fmt_f64(e.time),
            join(&e.participants, |id| id.0.to_string()),
            join(&e.pre_velocities, |v| fmt_f64(*v)),
            fmt_f64(e.post_velocity),
            e.result.0.to_string(),
            fmt_f64(e.position),
            join(&e.masses, |m| fmt_f64(*m)),
            fmt_f64(e.gap_residual),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    drop(w);
    out.flush().map_err(|e| CliError::io(path, e))
}

/// Comment-header values and the CSV records of an artifact.
struct Artifact {
    comments: BTreeMap<String, String>,
    header: Vec<String>,
    rows: Vec<csv::StringRecord>,
}

fn read_artifact(path: &Path) -> Result<Artifact, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut comments = BTreeMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').split_once(':') {
            comments.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err(path))?.iter().map(String::from).collect();
    let rows = reader.records().collect::<Result<Vec<_>, _>>().map_err(csv_err(path))?;
    Ok(Artifact { comments, header, rows })
}

/// The `config_hash` recorded in an artifact.
pub fn artifact_hash(path: &Path) -> Result<String, CliError> {
    read_artifact(path)?
        .comments
        .remove("config_hash")
        .ok_or_else(|| CliError::artifact(path, "missing '# config_hash:' line"))
}

fn field<'a>(path: &Path, row: &'a csv::StringRecord, k: usize) -> Result<&'a str, CliError> {
    row.get(k).ok_or_else(|| CliError::artifact(path, format!("row {row:?} is missing column {k}")))
}

fn num<T: std::str::FromStr>(path: &Path, s: &str) -> Result<T, CliError> {
    s.parse().map_err(|_| CliError::artifact(path, format!("cannot parse '{s}'")))
}

fn list<T: std::str::FromStr>(path: &Path, s: &str) -> Result<Vec<T>, CliError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|x| num(path, x)).collect()
}

fn members_range(path: &Path, s: &str) -> Result<Range<usize>, CliError> {
    let idx: Vec<usize> = list(path, s)?;
    let start = *idx.first().ok_or_else(|| CliError::artifact(path, "cluster without members"))?;
    if idx.iter().enumerate().any(|(k, &i)| i != start + k) {
        return Err(CliError::artifact(path, format!("members '{s}' are not contiguous")));
    }
    Ok(start..start + idx.len())
}

fn check_header(path: &Path, found: &[String], expected: &[&str]) -> Result<(), CliError> {
    if found.iter().map(String::as_str).ne(expected.iter().copied()) {
        return Err(CliError::artifact(path, format!("expected columns {expected:?}, found {found:?}")));
    }
    Ok(())
}

/// Rebuilds a [`TrajectoryMap`] from `trajectory.csv` and `events.csv` in
/// `dir`, given the initial atoms and their initial velocities.
pub fn read_trajectory(
    dir: &Path,
    atoms: DiscreteMeasure,
    initial_velocities: Vec<f64>,
) -> Result<(TrajectoryMap, String), CliError> {
    let tpath = dir.join(TRAJECTORY_FILE);
    let epath = dir.join(EVENTS_FILE);
    let traj = read_artifact(&tpath)?;
    let evts = read_artifact(&epath)?;
    check_header(&tpath, &traj.header, &TRAJECTORY_HEADER)?;
    check_header(&epath, &evts.header, &EVENTS_HEADER)?;
    let hash = traj
        .comments
        .get("config_hash")
        .cloned()
        .ok_or_else(|| CliError::artifact(&tpath, "missing '# config_hash:' line"))?;
    if evts.comments.get("config_hash") != Some(&hash) {
        return Err(CliError::artifact(&epath, "config hash differs from the trajectory file"));
    }
    let prov_text =
        traj.comments.get("provenance").ok_or_else(|| CliError::artifact(&tpath, "missing provenance line"))?;
    let prov: ProvenanceRecord =
        serde_json::from_str(prov_text).map_err(|e| CliError::artifact(&tpath, e))?;
    let model = match prov.model.as_str() {
        "pressureless_euler" => Model::PressurelessEuler,
        "euler_poisson" => Model::EulerPoisson,
        other => return Err(CliError::artifact(&tpath, format!("unknown model '{other}'"))),
    };
    let provenance = Provenance {
        model,
        interaction: prov.interaction,
        semiconvexity: prov.semiconvexity,
        gap_tol: prov.gap_tol,
        t_tol: prov.t_tol,
    };

    let mut records: BTreeMap<usize, ClusterRecord> = BTreeMap::new();
    let mut frames: Vec<Frame> = Vec::new();
    for row in &traj.rows {
        let t: f64 = num(&tpath, field(&tpath, row, 0)?)?;
        let id: usize = num(&tpath, field(&tpath, row, 1)?)?;
        let mass: f64 = num(&tpath, field(&tpath, row, 2)?)?;
        let position: f64 = num(&tpath, field(&tpath, row, 3)?)?;
        let velocity: f64 = num(&tpath, field(&tpath, row, 4)?)?;
        let members = members_range(&tpath, field(&tpath, row, 5)?)?;
        let kind = parse_kind(field(&tpath, row, 6)?)
            .ok_or_else(|| CliError::artifact(&tpath, format!("unknown frame kind in {row:?}")))?;
        records.entry(id).or_insert(ClusterRecord { id: ClusterId(id), members, mass, born: t, absorbed: None });
        let new_frame = match frames.last() {
            Some(f) => f.time != t || f.kind != kind || f.ids.contains(&ClusterId(id)),
            None => true,
        };
        if new_frame {
            frames.push(Frame { time: t, kind, ids: Vec::new(), positions: Vec::new(), velocities: Vec::new() });
        }
        let f = frames.last_mut().expect("frame just ensured");
        f.ids.push(ClusterId(id));
        f.positions.push(position);
        f.velocities.push(velocity);
    }

    let mut events = Vec::with_capacity(evts.rows.len());
    for row in &evts.rows {
        let time: f64 = num(&epath, field(&epath, row, 0)?)?;
        let participants: Vec<ClusterId> =
            list::<usize>(&epath, field(&epath, row, 1)?)?.into_iter().map(ClusterId).collect();
        let pre_velocities: Vec<f64> = list(&epath, field(&epath, row, 2)?)?;
        let post_velocity: f64 = num(&epath, field(&epath, row, 3)?)?;
        let result = ClusterId(num(&epath, field(&epath, row, 4)?)?);
        let position: f64 = num(&epath, field(&epath, row, 5)?)?;
        let masses: Vec<f64> = list(&epath, field(&epath, row, 6)?)?;
        let gap_residual: f64 = num(&epath, field(&epath, row, 7)?)?;
        if participants.len() < 2 || pre_velocities.len() != participants.len() || masses.len() != participants.len()
        {
            return Err(CliError::artifact(&epath, format!("inconsistent event row {row:?}")));
        }
        let mut start = usize::MAX;
        let mut end = 0;
        for p in &participants {
            let rec = records
                .get_mut(&p.0)
                .ok_or_else(|| CliError::artifact(&epath, format!("event refers to unknown cluster {p}")))?;
            rec.absorbed = Some(time);
            start = start.min(rec.members.start);
            end = end.max(rec.members.end);
        }
        let mass = masses.iter().sum();
        let rec = records
            .entry(result.0)
            .or_insert(ClusterRecord { id: result, members: start..end, mass, born: time, absorbed: None });
        rec.born = time;
        events.push(MergeEvent {
            time,
            position,
            participants,
            result,
            masses,
            pre_velocities,
            post_velocity,
            gap_residual,
        });
    }
    let clusters: Vec<ClusterRecord> = records.into_values().collect();
    let tm = TrajectoryMap::from_parts(atoms, initial_velocities, clusters, events, frames, prov.horizon, provenance)?;
    Ok((tm, hash))
}
