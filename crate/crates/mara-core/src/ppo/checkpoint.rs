//! Self-describing binary checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! | field                | type        |
//! |----------------------|-------------|
//! | magic                | `MARACKPT`  |
//! | format version       | u32 (= 1)   |
//! | obs_dim              | u32         |
//! | act_dim              | u32         |
//! | hidden               | u32         |
//! | flags                | u32         |
//! | trained_timesteps    | u64         |
//! | policy params        | f64 × N     |
//! | log_std              | f64 × act   |
//! | value params         | f64 × N     |
//! | normalizer (flag 1)  | see below   |
//!
//! Network parameter blocks are row-major `w1, b1, w2, b2, w3, b3`. Flag
//! bit 0 marks a trailing observation normalizer: `mean (obs_dim), m2
//! (obs_dim), count (1)` as f64.

use crate::error::{Error, Result};
use crate::ppo::mlp::Mlp;
use crate::ppo::normalizer::RunningNorm;
use crate::ppo::PolicyParams;
use std::io::{Read, Write};
use std::path::Path;

pub const CHECKPOINT_MAGIC: [u8; 8] = *b"MARACKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

const FLAG_OBS_NORM: u32 = 1;

/// Everything needed to run a trained policy.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: PolicyParams,
    pub normalizer: Option<RunningNorm>,
    pub trained_timesteps: u64,
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    checkpoint.params.validate()?;
    if let Some(n) = &checkpoint.normalizer {
        if n.dim() != checkpoint.params.obs_dim() {
            return Err(Error::contract("normalizer width differs from observation width"));
        }
    }
    let p = &checkpoint.params;
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(&CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(p.obs_dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(p.act_dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(p.hidden() as u32).to_le_bytes());
    let flags = if checkpoint.normalizer.is_some() {
        FLAG_OBS_NORM
    } else {
        0
    };
    buf.extend_from_slice(&flags.to_le_bytes());
    buf.extend_from_slice(&checkpoint.trained_timesteps.to_le_bytes());
    let mut write_f64s = |values: &[f64]| {
        for v in values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    };
    write_f64s(&p.policy.params);
    write_f64s(&p.log_std);
    write_f64s(&p.value.params);
    if let Some(n) = &checkpoint.normalizer {
        write_f64s(&n.mean);
        write_f64s(&n.m2);
        write_f64s(&[n.count]);
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    loc: String,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Load(format!("{}: truncated checkpoint", self.loc)));
        }
        let head = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let loc = path.display().to_string();
    let mut r = ByteReader {
        bytes: &bytes,
        pos: 0,
        loc: loc.clone(),
    };

    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::Load(format!("{loc}: not a checkpoint file")));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Load(format!(
            "{loc}: unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let obs_dim = r.u32()? as usize;
    let act_dim = r.u32()? as usize;
    let hidden = r.u32()? as usize;
    let flags = r.u32()?;
    if obs_dim == 0 || act_dim == 0 || hidden == 0 {
        return Err(Error::Load(format!("{loc}: zero-sized architecture header")));
    }
    if flags & !FLAG_OBS_NORM != 0 {
        return Err(Error::Load(format!("{loc}: unknown checkpoint flags {flags:#x}")));
    }
    let trained_timesteps = r.u64()?;

    let n_net = Mlp::param_count(obs_dim, hidden, act_dim);
    let n_value = Mlp::param_count(obs_dim, hidden, 1);
    let mut params = PolicyParams::zeros(obs_dim, act_dim, hidden);
    params.policy.params = r.f64s(n_net)?;
    params.log_std = r.f64s(act_dim)?;
    params.value.params = r.f64s(n_value)?;

    let normalizer = if flags & FLAG_OBS_NORM != 0 {
        let mean = r.f64s(obs_dim)?;
        let m2 = r.f64s(obs_dim)?;
        let count = r.f64s(1)?[0];
        Some(RunningNorm { mean, m2, count })
    } else {
        None
    };

    if r.remaining() != 0 {
        return Err(Error::Load(format!(
            "{loc}: {} trailing bytes after checkpoint payload",
            r.remaining()
        )));
    }
    params.validate().map_err(|e| {
        Error::Load(format!("{loc}: invalid parameters in checkpoint: {e}"))
    })?;
    Ok(Checkpoint {
        params,
        normalizer,
        trained_timesteps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn sample_checkpoint() -> Checkpoint {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let params = PolicyParams::init(11, 2, 16, &mut rng);
        let mut norm = RunningNorm::new(11);
        for i in 0..50 {
            let x: Vec<f64> = (0..11).map(|d| (i * d) as f64 * 0.01 - 0.3).collect();
            norm.update(&x);
        }
        Checkpoint {
            params,
            normalizer: Some(norm),
            trained_timesteps: 123_456,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        let original = sample_checkpoint();
        save_checkpoint(&path, &original).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, original);
        // Identical forward outputs to the last bit.
        let obs: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        assert_eq!(
            loaded.params.policy.forward(&obs),
            original.params.policy.forward(&obs)
        );
        assert_eq!(
            loaded.params.value.forward(&obs),
            original.params.value.forward(&obs)
        );
    }

    #[test]
    fn round_trip_without_normalizer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        let mut ckpt = sample_checkpoint();
        ckpt.normalizer = None;
        save_checkpoint(&path, &ckpt).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ckpt);
    }

    #[test]
    fn wrong_magic_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.bin");
        std::fs::write(&path, b"NOTACKPTxxxxxxxxxxxxxxxx").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Load(_))));
    }

    #[test]
    fn truncated_payload_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        save_checkpoint(&path, &sample_checkpoint()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Load(_))));
    }

    #[test]
    fn trailing_garbage_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        save_checkpoint(&path, &sample_checkpoint()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.extend_from_slice(&[0u8; 4]);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Load(_))));
    }

    #[test]
    fn future_version_is_a_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.bin");
        save_checkpoint(&path, &sample_checkpoint()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[8..12].copy_from_slice(&99u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        match load_checkpoint(&path) {
            Err(Error::Load(msg)) => assert!(msg.contains("version 99")),
            other => panic!("expected load error, got {other:?}"),
        }
    }
}
