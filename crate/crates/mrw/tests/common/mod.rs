#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn mrw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MRW_OUT_DIR")
        .output()
        .expect("run mrw")
}

pub fn ok(args: &[&str], out: &Path) -> Output {
    let o = mrw(args, out);
    assert!(
        o.status.success(),
        "mrw {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

/// Deterministic long-format prices: `issues` random walks over weekday
/// sessions of 510 minutes, with a larger opening-hour volatility.
pub fn write_prices(path: &Path, issues: usize, days: usize) {
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut uniform = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut text = String::from("timestamp,issue,price\n");
    let mut prices = vec![100.0f64; issues];
    let start = chrono::NaiveDate::from_ymd_opt(2008, 9, 1).unwrap();
    let mut day = start;
    let mut done = 0;
    while done < days {
        if chrono::Datelike::weekday(&day).number_from_monday() <= 5 {
            for m in 0..510u32 {
                let t = day.and_hms_opt(8 + m / 60, m % 60, 0).unwrap();
                let scale = if m < 30 { 0.002 } else { 0.001 };
                for (i, p) in prices.iter_mut().enumerate() {
                    let shock = (uniform() + uniform() + uniform() - 1.5) * 2.0 * scale;
                    *p *= shock.exp();
                    writeln!(text, "{},I{i},{}", t.format("%Y-%m-%dT%H:%M"), p).unwrap();
                }
            }
            done += 1;
        }
        day = day.succ_opt().unwrap();
    }
    std::fs::write(path, text).unwrap();
}

pub fn write_news(path: &Path, first: chrono::NaiveDate, days: usize) {
    let mut text = String::from("date,count\n");
    for i in 0..days {
        let d = first + chrono::Days::new(i as u64);
        let weekday = chrono::Datelike::weekday(&d).num_days_from_monday() as usize;
        writeln!(text, "{d},{}", 5 + 3 * (weekday == 0) as usize + i % 4).unwrap();
    }
    std::fs::write(path, text).unwrap();
}

pub fn read_kv(path: &Path) -> std::collections::BTreeMap<String, String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter_map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

/// Every file below `dir`, sorted, relative to it.
pub fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path().strip_prefix(dir).unwrap().to_path_buf())
        .collect();
    out.sort();
    out
}
