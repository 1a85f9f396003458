//! Dataset and trajectory files.
//!
//! Layout of a dataset directory:
//!
//! ```text
//! meta.toml            seed and the full simulation spec
//! imu.csv              t,wx,wy,wz,ax,ay,az
//! truth.csv            t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,bgx,bgy,bgz,bax,bay,baz
//! scans/NNNNNN.csv     t_offset,x,y,z   (scan j ends at (j + 1) / lidar_rate)
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{ExtendedPose, Rot3, Vector9};
use crate::measurement::{Scan, ScanPoint};
use crate::sim::{Dataset, ImuSample, SimSpec, TruthRecord};
use crate::symmetry::SystemState;

pub const IMU_HEADER: [&str; 7] = ["t", "wx", "wy", "wz", "ax", "ay", "az"];
pub const STATE_HEADER: [&str; 17] = [
    "t", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "bgx", "bgy", "bgz", "bax", "bay",
    "baz",
];
pub const SCAN_HEADER: [&str; 4] = ["t_offset", "x", "y", "z"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub seed: u64,
    pub imu_samples: usize,
    pub scans: usize,
    pub spec: SimSpec,
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::DatasetCorrupt(format!("{}: {other:?}", path.display())),
        }
    } else {
        Error::DatasetCorrupt(format!("{}: {e}", path.display()))
    }
}

fn write_rows<const N: usize>(path: &Path, header: &[&str; N], rows: impl Iterator<Item = [f64; N]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<const N: usize>(path: &Path, header: &[&str; N]) -> Result<Vec<[f64; N]>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let found = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::DatasetCorrupt(format!(
            "{}: expected header {}, found {}",
            path.display(),
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in r.deserialize::<Vec<f64>>().enumerate() {
        let values = rec.map_err(|e| csv_err(path, e))?;
        let row: [f64; N] = values.try_into().map_err(|v: Vec<f64>| {
            Error::DatasetCorrupt(format!(
                "{}: row {} has {} fields, expected {N}",
                path.display(),
                line + 1,
                v.len()
            ))
        })?;
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::DatasetCorrupt(format!(
                "{}: non-finite value in row {}",
                path.display(),
                line + 1
            )));
        }
        out.push(row);
    }
    Ok(out)
}

fn check_increasing(path: &Path, times: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for t in times {
        if t <= prev {
            return Err(Error::DatasetCorrupt(format!("{}: timestamps not increasing at t = {t}", path.display())));
        }
        prev = t;
    }
    Ok(())
}

pub fn state_row(t: f64, s: &SystemState) -> [f64; 17] {
    let q = s.nav.rot.to_quaternion_wxyz();
    let (p, v, b) = (&s.nav.pos, &s.nav.vel, &s.bias);
    [
        t, p.x, p.y, p.z, q[0], q[1], q[2], q[3], v.x, v.y, v.z, b[0], b[1], b[2], b[3], b[4], b[5],
    ]
}

fn row_state(row: &[f64; 17], ext: crate::lie::Pose) -> SystemState {
    let rot = Rot3::from_quaternion_wxyz([row[4], row[5], row[6], row[7]]);
    let mut bias = Vector9::zeros();
    for i in 0..6 {
        bias[i] = row[11 + i];
    }
    SystemState::new(
        ExtendedPose::new(rot, Vector3::new(row[8], row[9], row[10]), Vector3::new(row[1], row[2], row[3])),
        bias,
        ext,
    )
}

pub fn scan_path(dir: &Path, index: usize) -> PathBuf {
    dir.join("scans").join(format!("{index:06}.csv"))
}

pub fn write_states(path: &Path, states: &[(f64, SystemState)]) -> Result<()> {
    write_rows(path, &STATE_HEADER, states.iter().map(|(t, s)| state_row(*t, s)))
}

/// Reads a trajectory file; the extrinsic of every state is set to `ext`.
pub fn read_states(path: &Path, ext: crate::lie::Pose) -> Result<Vec<(f64, SystemState)>> {
    let rows = read_rows(path, &STATE_HEADER)?;
    check_increasing(path, rows.iter().map(|r| r[0]))?;
    Ok(rows.iter().map(|r| (r[0], row_state(r, ext))).collect())
}

pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<()> {
    fs::create_dir_all(dir.join("scans")).map_err(|e| Error::io(dir, e))?;
    let meta = DatasetMeta {
        seed: ds.seed,
        imu_samples: ds.imu.len(),
        scans: ds.scans.len(),
        spec: ds.spec.clone(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?;
    let meta_path = dir.join("meta.toml");
    fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;
    write_rows(
        &dir.join("imu.csv"),
        &IMU_HEADER,
        ds.imu.iter().map(|s| [s.t, s.gyro.x, s.gyro.y, s.gyro.z, s.accel.x, s.accel.y, s.accel.z]),
    )?;
    let truth: Vec<_> = ds.truth.iter().map(|r| (r.t, r.state)).collect();
    write_states(&dir.join("truth.csv"), &truth)?;
    for (j, scan) in ds.scans.iter().enumerate() {
        write_rows(
            &scan_path(dir, j),
            &SCAN_HEADER,
            scan.points.iter().map(|p| [p.t_offset, p.point.x, p.point.y, p.point.z]),
        )?;
    }
    Ok(())
}

pub fn read_meta(dir: &Path) -> Result<DatasetMeta> {
    let path = dir.join("meta.toml");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    toml::from_str(&text).map_err(|e| Error::DatasetCorrupt(format!("{}: {e}", path.display())))
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let meta = read_meta(dir)?;
    meta.spec
        .validate()
        .map_err(|e| Error::DatasetCorrupt(format!("meta.toml: {e}")))?;
    let imu_path = dir.join("imu.csv");
    let imu_rows = read_rows(&imu_path, &IMU_HEADER)?;
    check_increasing(&imu_path, imu_rows.iter().map(|r| r[0]))?;
    let imu: Vec<_> = imu_rows
        .iter()
        .map(|r| ImuSample {
            t: r[0],
            gyro: Vector3::new(r[1], r[2], r[3]),
            accel: Vector3::new(r[4], r[5], r[6]),
        })
        .collect();
    let truth: Vec<_> = read_states(&dir.join("truth.csv"), meta.spec.rig.extrinsic())?
        .into_iter()
        .map(|(t, state)| TruthRecord { t, state })
        .collect();
    if imu.len() != meta.imu_samples || truth.len() != meta.imu_samples {
        return Err(Error::DatasetCorrupt(format!(
            "expected {} IMU and truth rows, found {} and {}",
            meta.imu_samples,
            imu.len(),
            truth.len()
        )));
    }
    let rate = meta.spec.rig.lidar_rate;
    let mut scans = Vec::with_capacity(meta.scans);
    for j in 0..meta.scans {
        let path = scan_path(dir, j);
        let points = read_rows(&path, &SCAN_HEADER)?
            .iter()
            .map(|r| ScanPoint {
                point: Vector3::new(r[1], r[2], r[3]),
                t_offset: r[0],
            })
            .collect();
        scans.push(Scan {
            t_end: (j + 1) as f64 / rate,
            period: 1.0 / rate,
            points,
        });
    }
    Ok(Dataset {
        spec: meta.spec,
        seed: meta.seed,
        imu,
        truth,
        scans,
    })
}
