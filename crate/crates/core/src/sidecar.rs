//! Sidecar metadata binding an exported PNG to its symbol and geometry.
//!
//! Stored as TOML. The scheduled symbol is a hex string of the row-major
//! module values (1 = dark) packed MSB-first, zero-padded to whole bytes.

use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::ModuleGrid;
use crate::qr::{EcLevel, Layout, QrMatrix, Version};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageParams {
    pub delta: f64,
    pub eta: f64,
    pub spot_radius: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: String,
    pub tool: String,
    pub unix_time: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarMeta {
    pub format_version: u32,
    pub version: u8,
    pub ec_level: String,
    pub mask_index: u8,
    pub m: usize,
    /// Pixels per module.
    pub a: u32,
    /// Pixel position of module (0, 0) in the exported image.
    pub origin: [u32; 2],
    /// Width of the white border, in modules.
    pub quiet_zone: u32,
    pub scheduled_bits: String,
    pub payload_sha256: String,
    pub params: StageParams,
    #[serde(default)]
    pub provenance: Vec<Provenance>,
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn payload_digest(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

fn pack_bits(dark: &[bool]) -> String {
    let bytes: Vec<u8> = dark
        .chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &d)| acc | (u8::from(d) << (7 - i)))
        })
        .collect();
    hex::encode(bytes)
}

fn unpack_bits(hex_bits: &str, n: usize) -> Result<Vec<bool>> {
    let bytes = hex::decode(hex_bits).map_err(|e| Error::Sidecar(format!("scheduled_bits: {e}")))?;
    if bytes.len() != n.div_ceil(8) {
        return Err(Error::Sidecar(format!(
            "scheduled_bits holds {} bytes, expected {}",
            bytes.len(),
            n.div_ceil(8)
        )));
    }
    Ok((0..n).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect())
}

impl SidecarMeta {
    pub fn new(matrix: &QrMatrix, a: u32, quiet_zone: u32, payload: &[u8], params: StageParams) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            version: matrix.version.value(),
            ec_level: matrix.ec_level.to_string(),
            mask_index: matrix.mask_index,
            m: matrix.m,
            a,
            origin: [quiet_zone * a; 2],
            quiet_zone,
            scheduled_bits: pack_bits(&matrix.dark),
            payload_sha256: payload_digest(payload),
            params,
            provenance: Vec::new(),
        }
    }

    pub fn push_provenance(&mut self, stage: &str, tool: &str) {
        self.provenance.push(Provenance {
            stage: stage.to_owned(),
            tool: tool.to_owned(),
            unix_time: timestamp(),
        });
    }

    /// Grid in exported-image coordinates.
    pub fn grid(&self) -> Result<ModuleGrid> {
        ModuleGrid::with_origin(self.a, self.m, (self.origin[0], self.origin[1]))
    }

    /// Side of the exported image in pixels.
    pub fn image_side(&self) -> u32 {
        (self.m as u32 + 2 * self.quiet_zone) * self.a
    }

    pub fn ec_level(&self) -> Result<EcLevel> {
        self.ec_level.parse()
    }

    pub fn scheduled_matrix(&self) -> Result<QrMatrix> {
        let version = Version::new(self.version)?;
        let dark = unpack_bits(&self.scheduled_bits, self.m * self.m)?;
        Ok(QrMatrix {
            version,
            ec_level: self.ec_level()?,
            mask_index: self.mask_index,
            m: self.m,
            dark,
            layout: Arc::new(Layout::new(version)),
        })
    }

    pub fn digest_matches(&self, payload: &[u8]) -> bool {
        payload_digest(payload) == self.payload_sha256
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Sidecar(msg));
        if self.format_version != FORMAT_VERSION {
            return bad(format!("unsupported format_version {}", self.format_version));
        }
        let version = Version::new(self.version)?;
        if version.size() != self.m {
            return bad(format!("m = {} does not match version {}", self.m, self.version));
        }
        if self.mask_index > 7 {
            return bad(format!("mask_index {} out of range", self.mask_index));
        }
        self.ec_level()?;
        self.grid()?;
        if self.origin != [self.quiet_zone * self.a; 2] {
            return bad(format!("origin {:?} disagrees with the quiet zone", self.origin));
        }
        unpack_bits(&self.scheduled_bits, self.m * self.m)?;
        if self.payload_sha256.len() != 64 || hex::decode(&self.payload_sha256).is_err() {
            return bad("payload_sha256 is not a SHA-256 hex digest".into());
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Sidecar(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let meta: Self = toml::from_str(text).map_err(|e| Error::Sidecar(e.to_string()))?;
        meta.validate()?;
        Ok(meta)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Sidecar(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr::{build_matrix, encode_message};

    fn meta() -> (SidecarMeta, QrMatrix) {
        let frame = encode_message(b"sidecar", Version::new(5).unwrap(), EcLevel::M).unwrap();
        let matrix = build_matrix(&frame, 6);
        let params = StageParams {
            delta: 0.1,
            eta: 0.8,
            spot_radius: 3,
        };
        (SidecarMeta::new(&matrix, 13, 4, b"sidecar", params), matrix)
    }

    #[test]
    fn round_trip_reproduces_grid_and_bits() {
        let (mut m, matrix) = meta();
        m.push_provenance("generate", "artqr");
        let back = SidecarMeta::from_toml(&m.to_toml().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.grid().unwrap(), ModuleGrid::with_origin(13, 37, (52, 52)).unwrap());
        assert_eq!(back.scheduled_matrix().unwrap(), matrix);
        assert_eq!(back.image_side(), 585);
        assert!(back.digest_matches(b"sidecar"));
        assert!(!back.digest_matches(b"sidecaR"));
    }

    #[test]
    fn text_starts_with_format_version() {
        let (m, _) = meta();
        assert!(m.to_toml().unwrap().starts_with("format_version = 1\n"));
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let (m, _) = meta();
        let mut bad = m.clone();
        bad.m = 33;
        assert!(SidecarMeta::from_toml(&bad.to_toml().unwrap()).is_err());
        let mut bad = m.clone();
        bad.scheduled_bits.pop();
        bad.scheduled_bits.pop();
        assert!(SidecarMeta::from_toml(&bad.to_toml().unwrap()).is_err());
        let mut bad = m.clone();
        bad.format_version = 9;
        assert!(SidecarMeta::from_toml(&bad.to_toml().unwrap()).is_err());
        assert!(SidecarMeta::from_toml("version = 5").is_err());
    }

    #[test]
    fn source_date_epoch_is_honoured() {
        // Only checks parsing; the variable is process-global.
        if std::env::var("SOURCE_DATE_EPOCH").is_err() {
            assert!(timestamp() > 1_600_000_000);
        }
    }
}
