//! Where newform coefficients come from: the bundled tables, a local dump
//! directory of `<N>.tsv` files, or an HTTP endpoint serving the same files.

use std::path::{Path, PathBuf};

use super::fields::record_lines;
use super::records::NewformRecord;
use super::tables::bundled_tables;
use crate::{Error, Result};

/// Environment variable naming the download cache directory.
pub const CACHE_ENV: &str = "MODCURVES_CACHE";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientSource {
    Bundled,
    LocalDir(PathBuf),
    Http { base: String, cache: PathBuf },
}

impl CoefficientSource {
    /// `bundled`, an `http://` or `https://` base URL, or a directory path.
    pub fn from_descriptor(s: &str) -> Self {
        if s == "bundled" {
            CoefficientSource::Bundled
        } else if s.starts_with("http://") || s.starts_with("https://") {
            CoefficientSource::Http { base: s.trim_end_matches('/').to_string(), cache: default_cache_dir() }
        } else {
            CoefficientSource::LocalDir(PathBuf::from(s))
        }
    }

    /// The raw text of the level's file.
    pub fn level_text(&self, level: u64) -> Result<String> {
        match self {
            CoefficientSource::Bundled => {
                let recs: Vec<String> = bundled_records().into_iter().filter(|r| r.level == level).map(|r| r.to_string()).collect();
                if recs.is_empty() {
                    return Err(Error::NotFound(level));
                }
                Ok(recs.join("\n") + "\n")
            }
            CoefficientSource::LocalDir(dir) => {
                if !dir.is_dir() {
                    return Err(Error::SourceUnreachable(format!("{} is not a directory", dir.display())));
                }
                read_level_file(dir, level)?.ok_or(Error::NotFound(level))
            }
            CoefficientSource::Http { base, cache } => {
                if let Some(text) = read_level_file(cache, level)? {
                    return Ok(text);
                }
                let text = http_get(&format!("{base}/{level}.tsv"), level)?;
                // only cache what parses and validates
                parse_level(&text, level)?;
                std::fs::create_dir_all(cache)?;
                let tmp = cache.join(format!("{level}.tsv.part"));
                std::fs::write(&tmp, &text)?;
                std::fs::rename(&tmp, cache.join(format!("{level}.tsv")))?;
                Ok(text)
            }
        }
    }
}

pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("modcurves-cache"))
}

fn read_level_file(dir: &Path, level: u64) -> Result<Option<String>> {
    match std::fs::read_to_string(dir.join(format!("{level}.tsv"))) {
        Ok(t) => Ok(Some(t)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[cfg(feature = "http")]
fn http_get(url: &str, level: u64) -> Result<String> {
    let resp = reqwest::blocking::get(url).map_err(|e| Error::SourceUnreachable(format!("{url}: {e}")))?;
    if resp.status() == reqwest::StatusCode::NOT_FOUND {
        return Err(Error::NotFound(level));
    }
    if !resp.status().is_success() {
        return Err(Error::SourceUnreachable(format!("{url}: HTTP {}", resp.status())));
    }
    resp.text().map_err(|e| Error::SourceUnreachable(format!("{url}: {e}")))
}

#[cfg(not(feature = "http"))]
fn http_get(url: &str, _level: u64) -> Result<String> {
    Err(Error::SourceUnreachable(format!("{url}: built without HTTP support")))
}

/// Table rows as newform records labelled `f_...`.
pub fn bundled_records() -> Vec<NewformRecord> {
    bundled_tables()
        .into_iter()
        .map(|r| NewformRecord {
            label: r.label.replacen("C_", "f_", 1),
            level: r.level,
            eps: r.eps,
            d: r.d,
            cm: r.cm,
            ap: r.ap,
        })
        .collect()
}

/// Parses and validates every record of a level file.
pub fn parse_level(text: &str, level: u64) -> Result<Vec<NewformRecord>> {
    let mut out = Vec::new();
    for (n, line) in record_lines(text) {
        let r = NewformRecord::parse(line, n)?;
        if r.level != level {
            return Err(Error::Validation { label: r.label, msg: format!("level {} in the file for level {level}", r.level) });
        }
        r.validate()?;
        out.push(r);
    }
    Ok(out)
}

/// The newforms of level `level` (and degree list `eps`, when given) with
/// `a_p` for every `p <= prime_bound` the source provides.
pub fn fetch_coefficients(source: &CoefficientSource, level: u64, eps: Option<&str>, prime_bound: u64) -> Result<Vec<NewformRecord>> {
    let text = source.level_text(level)?;
    let mut recs = parse_level(&text, level)?;
    if let Some(e) = eps {
        let norm = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
        recs.retain(|r| norm(&r.eps) == norm(e));
    }
    if recs.is_empty() {
        return Err(Error::NotFound(level));
    }
    for r in &mut recs {
        r.truncate(prime_bound);
    }
    Ok(recs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    #[test]
    fn bundled_level_63() {
        let recs = fetch_coefficients(&CoefficientSource::Bundled, 63, None, 100).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].ap.keys().copied().collect::<Vec<_>>(), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(fetch_coefficients(&CoefficientSource::Bundled, 62, None, 100), Err(Error::NotFound(62)));
    }

    #[test]
    fn local_dir_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let src = CoefficientSource::LocalDir(dir.path().to_path_buf());
        let text = CoefficientSource::Bundled.level_text(63).unwrap();
        std::fs::write(dir.path().join("63.tsv"), &text).unwrap();
        let recs = fetch_coefficients(&src, 63, Some("1"), 5).unwrap();
        assert_eq!(recs[0].ap.len(), 3);
        assert_eq!(fetch_coefficients(&src, 64, None, 5), Err(Error::NotFound(64)));
        let gone = CoefficientSource::LocalDir(dir.path().join("missing"));
        assert!(matches!(fetch_coefficients(&gone, 63, None, 5), Err(Error::SourceUnreachable(_))));
        std::fs::write(dir.path().join("63.tsv"), text.replace("a2=s[0,1]", "a2=s[0,3]")).unwrap();
        match fetch_coefficients(&src, 63, None, 5) {
            Err(Error::Validation { msg, .. }) => assert!(msg.contains("p = 2")),
            other => panic!("{other:?}"),
        }
    }

    fn serve_once(body: String) -> (String, std::thread::JoinHandle<()>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let h = std::thread::spawn(move || {
            let (mut s, _) = listener.accept().unwrap();
            let mut buf = [0u8; 1024];
            let _ = s.read(&mut buf).unwrap();
            let resp = format!("HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}", body.len());
            s.write_all(resp.as_bytes()).unwrap();
        });
        (format!("http://{addr}"), h)
    }

    #[cfg(feature = "http")]
    #[test]
    fn http_cache_round_trip() {
        let cache = tempfile::tempdir().unwrap();
        let body = CoefficientSource::Bundled.level_text(63).unwrap();
        let (base, h) = serve_once(body.clone());
        let src = CoefficientSource::Http { base: base.clone(), cache: cache.path().to_path_buf() };
        let first = src.level_text(63).unwrap();
        h.join().unwrap();
        // the server is gone: the second fetch must come from the cache
        let second = src.level_text(63).unwrap();
        assert_eq!(first.as_bytes(), second.as_bytes());
        assert_eq!(first, body);
        let offline = CoefficientSource::Http { base, cache: cache.path().join("empty") };
        assert!(matches!(offline.level_text(63), Err(Error::SourceUnreachable(_))));
    }
}
