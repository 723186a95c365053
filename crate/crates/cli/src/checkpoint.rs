//! Per-bidegree checkpoints of E¹ groups.
//!
//! A checkpoint file is named by the SHA-256 of everything that determines
//! its content, so a changed configuration never reads a stale entry.

use std::path::{Path, PathBuf};

use braidwork_core::curtis::Bidegree;
use braidwork_core::exactla::AbelianGroup;
use braidwork_core::{Integer, RingKind};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "BRAIDWORK_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct Checkpoints {
    dir: PathBuf,
}

impl Checkpoints {
    /// `$BRAIDWORK_CACHE_DIR`, else a `braidwork-checkpoints` directory next
    /// to the report file, else none.
    pub fn locate(out: Option<&Path>) -> Option<Checkpoints> {
        if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
            return Some(Checkpoints { dir: PathBuf::from(dir) });
        }
        let parent = out?.parent().map(Path::to_path_buf).unwrap_or_default();
        let parent = if parent.as_os_str().is_empty() { PathBuf::from(".") } else { parent };
        Some(Checkpoints { dir: parent.join("braidwork-checkpoints") })
    }

    pub fn at(dir: impl Into<PathBuf>) -> Checkpoints {
        Checkpoints { dir: dir.into() }
    }

    pub fn key(ring: RingKind, b: Bidegree) -> String {
        let material = format!("braidwork e1 v{} ring={ring} t={} n={} basis=lex", env!("CARGO_PKG_VERSION"), b.t, b.n);
        let digest = Sha256::digest(material.as_bytes());
        digest.iter().take(12).map(|x| format!("{x:02x}")).collect()
    }

    fn path(&self, ring: RingKind, b: Bidegree) -> PathBuf {
        self.dir.join(format!("e1-t{}-n{}-{}.json", b.t, b.n, Self::key(ring, b)))
    }

    pub fn load(&self, ring: RingKind, b: Bidegree) -> Option<AbelianGroup> {
        let text = std::fs::read_to_string(self.path(ring, b)).ok()?;
        let v: Value = serde_json::from_str(&text).ok()?;
        if v["t"].as_u64()? as usize != b.t || v["n"].as_u64()? as usize != b.n {
            return None;
        }
        let free = v["free_rank"].as_u64()? as usize;
        let torsion = v["torsion"]
            .as_array()?
            .iter()
            .map(|x| match x {
                Value::Number(n) => n.as_i64().map(Integer::from),
                Value::String(s) => s.parse().ok(),
                _ => None,
            })
            .collect::<Option<Vec<Integer>>>()?;
        Some(AbelianGroup { free_rank: free, invariant_factors: torsion })
    }

    /// Best effort: a failed write only costs a recomputation later.
    pub fn store(&self, ring: RingKind, b: Bidegree, g: &AbelianGroup) {
        let torsion = serde_json::to_value(g).map(|v| v["invariant_factors"].clone()).unwrap_or(Value::Null);
        let v = json!({ "t": b.t, "n": b.n, "free_rank": g.free_rank, "torsion": torsion });
        if std::fs::create_dir_all(&self.dir).is_ok() {
            let tmp = self.dir.join(format!(".tmp-{}-{}", std::process::id(), Self::key(ring, b)));
            if std::fs::write(&tmp, v.to_string()).is_ok() {
                let _ = std::fs::rename(&tmp, self.path(ring, b));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Checkpoints::at(dir.path());
        let b = Bidegree::new(4, 3);
        assert!(c.load(RingKind::Integers, b).is_none());
        let g = AbelianGroup::from_orders(1, &[Integer::from(2), Integer::from(6)]);
        c.store(RingKind::Integers, b, &g);
        assert_eq!(c.load(RingKind::Integers, b), Some(g));
        assert!(c.load(RingKind::ModP(2), b).is_none());
        assert_ne!(Checkpoints::key(RingKind::Integers, b), Checkpoints::key(RingKind::ModP(3), b));
    }
}
