//! Channel database persistence: the `OWCDB1` binary container and a
//! lossless CSV export.
//!
//! Layout: the 6-byte magic `OWCDB1`, a u16 format version, a length-prefixed
//! JSON metadata block (scene hash, receiver spec, binning parameters,
//! transmit table, access points, locations, and modelling notes), then the
//! fixed-order record array. All integers and floats are little-endian; a
//! rebuild from identical inputs produces identical bytes. Impulse responses
//! are stored once per (location, access point, element) and are wavelength
//! independent.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{ChannelDb, ChannelParams, ChannelRecord, DbLocation, ImpulseResponse};
use crate::receivers::ReceiverSpec;
use crate::scene::{AccessPoint, TransmitSpec};

pub const MAGIC: &[u8; 6] = b"OWCDB1";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct DbMeta {
    scene_hash: String,
    receiver: ReceiverSpec,
    params: ChannelParams,
    transmit: Vec<TransmitSpec>,
    access_points: Vec<AccessPoint>,
    locations: Vec<DbLocation>,
    /// Records hold geometric gains; apply per-wavelength transmit power and
    /// responsivity downstream.
    wavelength_independent: bool,
    /// Name of the run manifest that produced this file, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    produced_by: Option<String>,
}

/// Serializes a channel database to bytes.
pub fn to_bytes(db: &ChannelDb, produced_by: Option<&str>) -> Result<Vec<u8>> {
    db.validate()?;
    let meta = DbMeta {
        scene_hash: hex(&db.scene_hash),
        receiver: db.receiver.clone(),
        params: db.params,
        transmit: db.transmit.clone(),
        access_points: db.access_points.clone(),
        locations: db.locations.clone(),
        wavelength_independent: true,
        produced_by: produced_by.map(str::to_owned),
    };
    let meta_json = serde_json::to_vec(&meta)
        .map_err(|e| Error::DbFormat(format!("metadata serialization failed: {e}")))?;

    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&meta_json);
    out.extend_from_slice(&(db.records.len() as u32).to_le_bytes());
    for rec in &db.records {
        out.extend_from_slice(&rec.location_id.to_le_bytes());
        out.extend_from_slice(&rec.ap_id.to_le_bytes());
        out.extend_from_slice(&rec.element_id.to_le_bytes());
        for g in rec.gain_by_order {
            out.extend_from_slice(&g.to_le_bytes());
        }
        out.extend_from_slice(&rec.dc_gain.to_le_bytes());
        let t0_bin = (rec.ir.t0_s / rec.ir.dt_s).round() as u32;
        out.extend_from_slice(&t0_bin.to_le_bytes());
        out.extend_from_slice(&(rec.ir.bins.len() as u32).to_le_bytes());
        for b in &rec.ir.bins {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn save(db: &ChannelDb, path: &Path, produced_by: Option<&str>) -> Result<()> {
    let bytes = to_bytes(db, produced_by)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::DbFormat(format!(
                "truncated file: needed {n} bytes at offset {}",
                self.pos
            )));
        }
        let slice = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Deserializes a channel database from bytes.
pub fn from_bytes(buf: &[u8]) -> Result<ChannelDb> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::DbFormat(
            "not a channel database (bad magic)".into(),
        ));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::DbFormat(format!(
            "unsupported format version {version}"
        )));
    }
    let meta_len = r.u32()? as usize;
    let meta: DbMeta = serde_json::from_slice(r.take(meta_len)?)
        .map_err(|e| Error::DbFormat(format!("invalid metadata: {e}")))?;
    let scene_hash = unhex(&meta.scene_hash)?;

    let n_records = r.u32()? as usize;
    let mut records = Vec::with_capacity(n_records);
    for _ in 0..n_records {
        let location_id = r.u32()?;
        let ap_id = r.u32()?;
        let element_id = r.u32()?;
        let gain_by_order = [r.f64()?, r.f64()?, r.f64()?];
        let dc_gain = r.f64()?;
        let t0_bin = r.u32()?;
        let n_bins = r.u32()? as usize;
        let mut bins = Vec::with_capacity(n_bins);
        for _ in 0..n_bins {
            bins.push(r.f64()?);
        }
        records.push(ChannelRecord {
            location_id,
            ap_id,
            element_id,
            ir: ImpulseResponse {
                dt_s: meta.params.dt_s,
                t0_s: t0_bin as f64 * meta.params.dt_s,
                bins,
            },
            gain_by_order,
            dc_gain,
        });
    }
    if r.pos != buf.len() {
        return Err(Error::DbFormat(format!(
            "{} trailing bytes after the last record",
            buf.len() - r.pos
        )));
    }

    let db = ChannelDb {
        scene_hash,
        receiver: meta.receiver,
        params: meta.params,
        transmit: meta.transmit,
        access_points: meta.access_points,
        locations: meta.locations,
        records,
    };
    db.validate()?;
    Ok(db)
}

pub fn load(path: &Path) -> Result<ChannelDb> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes).map_err(|e| match e {
        Error::DbFormat(msg) => Error::DbFormat(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Lossless CSV export: one row per nonzero impulse-response bin, with the
/// bin index counted from t = 0. Floats use the shortest representation that
/// round-trips.
pub fn export_csv<W: Write>(db: &ChannelDb, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "location_id,ap_id,element_id,dc_gain,bin_index,bin_value")?;
    for rec in &db.records {
        let t0_bin = (rec.ir.t0_s / rec.ir.dt_s).round() as u64;
        for (k, &v) in rec.ir.bins.iter().enumerate() {
            if v != 0.0 {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    rec.location_id,
                    rec.ap_id,
                    rec.element_id,
                    rec.dc_gain,
                    t0_bin + k as u64,
                    v
                )?;
            }
        }
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unhex(s: &str) -> Result<[u8; 32]> {
    if s.len() != 64 {
        return Err(Error::DbFormat("scene hash must be 64 hex chars".into()));
    }
    let mut out = [0u8; 32];
    for (i, chunk) in s.as_bytes().chunks(2).enumerate() {
        let hi = (chunk[0] as char)
            .to_digit(16)
            .ok_or_else(|| Error::DbFormat("invalid scene hash".into()))?;
        let lo = (chunk[1] as char)
            .to_digit(16)
            .ok_or_else(|| Error::DbFormat("invalid scene hash".into()))?;
        out[i] = (hi * 16 + lo) as u8;
    }
    Ok(out)
}
