//! Binary and CSV formats for sample sets.
//!
//! Binary layout, all integers little-endian `u64`, floats little-endian `f64`:
//!
//! ```text
//! magic      5 bytes  "LGAS1"
//! N          u64      particles per configuration
//! L          u64      window start (0 without a window)
//! K          u64      window length (0 without a window)
//! count      u64      number of configurations
//! chains     u64      number of chains; rows are grouped by chain, in order
//! hash       32 bytes digest of the producing configuration (zeros if none)
//! rows       count * N f64, row-major
//! ```

use std::io::{self, Read, Write};

use crate::sampler::{Configuration, SampleMeta, SampleSet};

pub const MAGIC: &[u8; 5] = b"LGAS1";

#[derive(Debug, thiserror::Error)]
pub enum SamplesIoError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("not a sample file (bad magic)")]
    BadMagic,
    #[error("corrupt sample file: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplesHeader {
    pub n: usize,
    pub window: Option<(usize, usize)>,
    pub count: usize,
    pub chains: usize,
    pub config_hash: [u8; 32],
}

fn write_u64<W: Write>(w: &mut W, v: usize) -> io::Result<()> {
    w.write_all(&(v as u64).to_le_bytes())
}

fn read_u64<R: Read>(r: &mut R) -> Result<usize, SamplesIoError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    usize::try_from(u64::from_le_bytes(b)).map_err(|_| SamplesIoError::Corrupt("integer overflow".into()))
}

/// Chain count recorded for a set: distinct chain ids, which must form
/// contiguous equal runs to be recoverable on read.
fn chain_layout(s: &SampleSet) -> usize {
    let mut chains = 1;
    for w in s.chain_ids.windows(2) {
        if w[1] != w[0] {
            chains += 1;
        }
    }
    if s.is_empty() || s.len() % chains != 0 {
        return 1;
    }
    let per = s.len() / chains;
    let regular = s
        .chain_ids
        .chunks(per)
        .all(|c| c.iter().all(|&id| id == c[0]));
    if regular {
        chains
    } else {
        1
    }
}

pub fn write_binary<W: Write>(w: &mut W, s: &SampleSet, config_hash: [u8; 32]) -> Result<(), SamplesIoError> {
    w.write_all(MAGIC)?;
    write_u64(w, s.n())?;
    let (l, k) = s.meta.window.unwrap_or((0, 0));
    write_u64(w, l)?;
    write_u64(w, k)?;
    write_u64(w, s.len())?;
    write_u64(w, chain_layout(s))?;
    w.write_all(&config_hash)?;
    let mut buf = Vec::with_capacity(8 * s.n());
    for c in &s.configs {
        buf.clear();
        for x in c.as_slice() {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R) -> Result<SamplesHeader, SamplesIoError> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SamplesIoError::BadMagic);
    }
    let n = read_u64(r)?;
    let l = read_u64(r)?;
    let k = read_u64(r)?;
    let count = read_u64(r)?;
    let chains = read_u64(r)?;
    let mut config_hash = [0u8; 32];
    r.read_exact(&mut config_hash)?;
    if n == 0 || chains == 0 || count % chains != 0 {
        return Err(SamplesIoError::Corrupt(format!("N={n}, count={count}, chains={chains}")));
    }
    Ok(SamplesHeader {
        n,
        window: (k > 0).then_some((l, k)),
        count,
        chains,
        config_hash,
    })
}

/// Reads a whole file; `beta` is not stored and must be supplied.
pub fn read_binary<R: Read>(r: &mut R, beta: f64) -> Result<(SamplesHeader, SampleSet), SamplesIoError> {
    let h = read_header(r)?;
    let mut configs = Vec::with_capacity(h.count);
    let mut row = vec![0u8; 8 * h.n];
    for i in 0..h.count {
        r.read_exact(&mut row)?;
        let x: Vec<f64> = row
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        let c = Configuration::new(x).map_err(|e| SamplesIoError::Corrupt(format!("row {i}: {e}")))?;
        configs.push(c);
    }
    let per = h.count / h.chains;
    let chain_ids = (0..h.count).map(|i| i / per.max(1)).collect();
    let set = SampleSet {
        configs,
        chain_ids,
        meta: SampleMeta {
            seed: 0,
            n: h.n,
            beta,
            acceptance: vec![f64::NAN; h.chains],
            step_sizes: Vec::new(),
            window: h.window,
            constraint: None,
            description: "read from binary sample file".into(),
        },
    };
    Ok((h, set))
}

/// CSV with a header `chain,lambda_1,...,lambda_N`; floats use the shortest
/// representation that round-trips.
pub fn write_csv<W: Write>(w: &mut W, s: &SampleSet) -> io::Result<()> {
    let mut header = String::from("chain");
    for j in 1..=s.n() {
        header.push_str(&format!(",lambda_{j}"));
    }
    writeln!(w, "{header}")?;
    for (c, id) in s.configs.iter().zip(&s.chain_ids) {
        let mut line = id.to_string();
        for x in c.as_slice() {
            line.push(',');
            line.push_str(&format!("{x:?}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_gaussian_beta_set;

    #[test]
    fn binary_round_trip() {
        let mut s = sample_gaussian_beta_set(7, 2.0, 12, 3, 5).unwrap();
        s.meta.window = Some((2, 3));
        let mut buf = Vec::new();
        write_binary(&mut buf, &s, [7u8; 32]).unwrap();
        assert_eq!(&buf[..5], b"LGAS1");
        assert_eq!(buf.len(), 5 + 5 * 8 + 32 + 12 * 7 * 8);
        let (h, back) = read_binary(&mut buf.as_slice(), 2.0).unwrap();
        assert_eq!(h.window, Some((2, 3)));
        assert_eq!(h.chains, 3);
        assert_eq!(h.config_hash, [7u8; 32]);
        assert_eq!(back.configs, s.configs);
        assert_eq!(back.chain_ids, s.chain_ids);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_header(&mut &b"NOPE1xxxxxxxx"[..]), Err(SamplesIoError::BadMagic)));
        let s = sample_gaussian_beta_set(3, 1.0, 2, 1, 0).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &s, [0; 32]).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(matches!(read_binary(&mut buf.as_slice(), 1.0), Err(SamplesIoError::Io(_))));
    }

    #[test]
    fn csv_layout() {
        let s = sample_gaussian_beta_set(2, 2.0, 3, 1, 1).unwrap();
        let mut out = Vec::new();
        write_csv(&mut out, &s).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "chain,lambda_1,lambda_2");
        assert_eq!(lines.len(), 4);
        let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(first, s.configs[0][0]);
    }
}
