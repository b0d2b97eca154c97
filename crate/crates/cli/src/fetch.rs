//! Dataset archive retrieval with checksum pinning.
//!
//! Archives are streamed to a partial file while a SHA-256 digest
//! accumulates. A digest given via `--expect-sha256`, or one pinned in
//! `<dir>/<name>.sha256` by an earlier fetch, must match before anything is
//! unpacked; the first fetch of a dataset pins the digest it saw
//! (trust on first use).

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use crate::usage;

pub const DEFAULT_BASE_URL: &str = "https://www.chrsmrrs.com/graphkerneldatasets";

/// Benchmarked datasets, by TU archive name.
pub const SUPPORTED: [&str; 5] = ["AIDS", "MUTAG", "NCI1", "PROTEINS", "PTC_MR"];

pub fn run(dataset: &str, dir: &Path, expect_sha256: Option<&str>, base_url: &str) -> Result<()> {
    let name = canonical_name(dataset)?;
    // A malformed digest is an invocation error; reject before any bytes
    // move.
    let required = expect_sha256.map(normalize_hex).transpose()?;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let url = format!("{}/{name}.zip", base_url.trim_end_matches('/'));
    let partial = dir.join(format!(".{name}.zip.partial"));
    let digest = match download(&url, &partial) {
        Ok(d) => d,
        Err(e) => {
            let _ = fs::remove_file(&partial);
            return Err(e);
        }
    };

    let pin_path = dir.join(format!("{name}.sha256"));
    let expected = match required {
        Some(hex) => Some(hex),
        None => read_pin(&pin_path)?,
    };
    match expected {
        Some(exp) if exp != digest => {
            let _ = fs::remove_file(&partial);
            bail!("checksum mismatch for {name}.zip: expected {exp}, downloaded {digest}");
        }
        Some(_) => println!("sha256 verified: {digest}"),
        None => {
            fs::write(&pin_path, format!("{digest}  {name}.zip\n"))
                .with_context(|| format!("cannot write {}", pin_path.display()))?;
            println!("sha256 pinned on first fetch: {digest}");
            println!("(future fetches verify against {})", pin_path.display());
        }
    }

    let unpacked = unpack(&partial, dir);
    let _ = fs::remove_file(&partial);
    unpacked?;

    let ds_dir = dir.join(name);
    let ds = ohmkernel::tudata::load_tu(&ds_dir, name)
        .context("unpacked archive is not a loadable dataset")?;
    println!("fetched {name}: {} graphs in {}", ds.len(), ds_dir.display());
    Ok(())
}

fn canonical_name(dataset: &str) -> Result<&'static str> {
    let normalized = dataset.to_uppercase().replace('-', "_");
    SUPPORTED
        .iter()
        .find(|&&s| s == normalized)
        .copied()
        .ok_or_else(|| {
            usage(format!(
                "unknown dataset {dataset:?}; supported: {}",
                SUPPORTED.join(", ")
            ))
        })
}

fn normalize_hex(hex: &str) -> Result<String> {
    let h = hex.trim().to_lowercase();
    if h.len() != 64 || !h.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(usage(format!("--expect-sha256 must be 64 hex digits, got {hex:?}")));
    }
    Ok(h)
}

/// First whitespace-delimited token of the pin file, if present.
fn read_pin(path: &Path) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(content) => {
            let token = content.split_whitespace().next().map(str::to_string);
            match token {
                Some(t) => Ok(Some(normalize_hex(&t).with_context(|| {
                    format!("corrupt pin file {}", path.display())
                })?)),
                None => Ok(None),
            }
        }
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e).with_context(|| format!("cannot read {}", path.display())),
    }
}

struct TeeWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for TeeWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn download(url: &str, to: &Path) -> Result<String> {
    let resp = attohttpc::get(url)
        .send()
        .with_context(|| format!("request to {url} failed"))?;
    if !resp.is_success() {
        bail!("HTTP {} fetching {url}", resp.status());
    }
    let file = File::create(to).with_context(|| format!("cannot create {}", to.display()))?;
    let mut tee = TeeWriter { inner: io::BufWriter::new(file), hasher: Sha256::new() };
    resp.write_to(&mut tee).context("download interrupted")?;
    tee.flush()?;
    let digest = tee.hasher.finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn unpack(archive: &Path, dir: &Path) -> Result<()> {
    let file = File::open(archive).with_context(|| format!("cannot open {}", archive.display()))?;
    let mut zip = zip::ZipArchive::new(file).context("corrupt zip archive")?;
    for i in 0..zip.len() {
        let mut entry = zip.by_index(i)?;
        let Some(rel) = entry.enclosed_name() else {
            bail!("archive entry {:?} escapes the target directory", entry.name());
        };
        let dest = dir.join(rel);
        if entry.is_dir() {
            fs::create_dir_all(&dest)?;
        } else {
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent)?;
            }
            let mut out =
                File::create(&dest).with_context(|| format!("cannot create {}", dest.display()))?;
            io::copy(&mut entry, &mut out)?;
        }
    }
    Ok(())
}
