mod common;

use common::{files, mrw, ok, read_kv, write_news, write_prices};

#[test]
fn simulate_then_estimate_recovers_intermittency() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(
        &[
            "simulate",
            "--lambda2",
            "0.02",
            "--L",
            "4096",
            "--n",
            "262144",
            "--seed",
            "7",
        ],
        &sim,
    );
    let est = dir.path().join("est");
    let input = sim.join("simulate.csv");
    ok(&["estimate", "--input", input.to_str().unwrap()], &est);
    let fit = read_kv(&est.join("fit.txt"));
    let lambda2: f64 = fit["lambda2"].parse().unwrap();
    assert!((0.014..=0.026).contains(&lambda2), "{fit:?}");
    assert_eq!(fit["status"], "ok");
    let curve = std::fs::read_to_string(est.join("covcurve.csv")).unwrap();
    assert!(curve.starts_with("k,cov,n\n1,"));
    let manifest = std::fs::read_to_string(est.join("manifest.txt")).unwrap();
    assert!(manifest.contains("command=estimate\n"));
    assert!(manifest.contains("simulate.csv sha256="));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# simulation\nlambda2=0.018\nL=12975.43\nn=4096\nseed=1\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["simulate", "--config", cfg.to_str().unwrap()], &a);
    ok(
        &["simulate", "--config", cfg.to_str().unwrap(), "--seed", "2"],
        &b,
    );
    let ma = std::fs::read_to_string(a.join("manifest.txt")).unwrap();
    let mb = std::fs::read_to_string(b.join("manifest.txt")).unwrap();
    assert!(ma.contains("seed=1\n") && mb.contains("seed=2\n"));
    assert!(ma.contains("\"L\":12975.43"));
    assert_ne!(
        std::fs::read(a.join("simulate.csv")).unwrap(),
        std::fs::read(b.join("simulate.csv")).unwrap()
    );
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_mrw"))
        .args([
            "simulate",
            "--lambda2",
            "0",
            "--L",
            "10",
            "--n",
            "64",
            "--seed",
            "3",
        ])
        .env("MRW_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(out.join("simulate.csv").is_file());
}

#[test]
fn errors_are_single_machine_readable_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (&["launch"], "command=launch module=cli"),
        (
            &["estimate", "--input", "/no/such/file.csv"],
            "command=estimate module=cli",
        ),
        (
            &[
                "simulate",
                "--lambda2=-1",
                "--L",
                "10",
                "--n",
                "64",
                "--seed",
                "1",
            ],
            "command=simulate module=mrw_simulator",
        ),
        (&["simulate", "--n", "64"], "command=simulate module=cli"),
    ];
    for (args, want) in cases {
        let o = mrw(args, dir.path());
        assert!(!o.status.success());
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with(&format!("error: {want} message=")), "{err}");
    }
}

#[test]
fn help_documents_columns() {
    let dir = tempfile::tempdir().unwrap();
    let expected = [
        ("simulate", "index,dX,omega"),
        ("simulate-omori", "t_minutes"),
        ("market-mode", "timestamp,dM"),
        ("estimate", "k,cov,n"),
        ("spectrum", "q,zeta,se"),
        ("window-scan", "window_end,lambda2,L,var_omega,r2,flag"),
        ("omori", "side,t_minutes,N"),
        ("news-fit", "date,var_omega,cum_news"),
    ];
    for (cmd, columns) in expected {
        let o = ok(&[cmd, "--help"], dir.path());
        let text = String::from_utf8(o.stdout).unwrap().replace('\n', " ");
        assert!(text.contains(columns), "{cmd}: {text}");
    }
}

#[test]
fn market_mode_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    write_prices(&prices, 3, 6);
    let mut text = std::fs::read_to_string(&prices).unwrap();
    text.push_str("2008-09-01T07:59,I0,-3\n");
    std::fs::write(&prices, text).unwrap();
    let calendar = dir.path().join("calendar.csv");
    std::fs::write(&calendar, "date,open_skip_minutes\n2008-09-02,5\n").unwrap();

    let out = dir.path().join("mm");
    ok(
        &[
            "market-mode",
            "--prices",
            prices.to_str().unwrap(),
            "--calendar",
            calendar.to_str().unwrap(),
        ],
        &out,
    );
    let report = std::fs::read_to_string(out.join("ingestion_report.txt")).unwrap();
    assert_eq!(report.lines().count(), 1);
    assert!(report.contains("non-positive price"));
    let sigmas = std::fs::read_to_string(out.join("sigmas.csv")).unwrap();
    assert_eq!(sigmas.lines().count(), 4);
    let mm = std::fs::read_to_string(out.join("market_mode.csv")).unwrap();
    let masked = mm.lines().filter(|l| l.ends_with(',')).count();
    // The 07:59 minute, each session's first minute and the skipped opening minutes.
    assert!(masked >= 1 + 6 + 5, "{masked}");
    assert_eq!(
        files(&out),
        [
            "ingestion_report.txt",
            "manifest.txt",
            "market_mode.csv",
            "profile.csv",
            "sigmas.csv"
        ]
        .map(std::path::PathBuf::from)
    );

    let dup = dir.path().join("dup.csv");
    std::fs::write(
        &dup,
        "timestamp,issue,price\n2008-09-01T08:00,A,1\n2008-09-01T08:00,A,2\n",
    )
    .unwrap();
    let o = mrw(
        &["market-mode", "--prices", dup.to_str().unwrap()],
        &dir.path().join("d"),
    );
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("rows 2 and 3"), "{err}");
}

#[test]
fn window_scan_feeds_news_fit() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(
        &[
            "simulate",
            "--lambda2",
            "0.03",
            "--L",
            "2048",
            "--n",
            "131072",
            "--seed",
            "5",
        ],
        &sim,
    );
    let ws = dir.path().join("ws");
    let input = sim.join("simulate.csv");
    ok(
        &[
            "window-scan",
            "--input",
            input.to_str().unwrap(),
            "--window",
            "16384",
            "--stride",
            "1440",
            "--detrend",
            "none",
        ],
        &ws,
    );
    let table = std::fs::read_to_string(ws.join("window_scan.csv")).unwrap();
    assert!(table.starts_with("window_end,lambda2,L,var_omega,r2,flag\n"));
    assert!(table.lines().count() > 50);
    let news = dir.path().join("news.csv");
    write_news(
        &news,
        chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
        120,
    );
    let nf = dir.path().join("nf");
    ok(
        &[
            "news-fit",
            "--trajectory",
            ws.join("window_scan.csv").to_str().unwrap(),
            "--news",
            news.to_str().unwrap(),
            "--start",
            "2000-01-01",
            "--end",
            "2000-12-31",
        ],
        &nf,
    );
    let fit = read_kv(&nf.join("news_fit.txt"));
    assert!(fit["alpha"].parse::<f64>().unwrap().is_finite());
    let joined = std::fs::read_to_string(nf.join("news_joined.csv")).unwrap();
    assert!(joined.starts_with("date,var_omega,cum_news\n"));
}

#[test]
fn omori_on_simulated_events() {
    let dir = tempfile::tempdir().unwrap();
    let ev = dir.path().join("ev");
    ok(
        &[
            "simulate-omori",
            "--beta-before",
            "0.5",
            "--beta-after",
            "0.7",
            "--c-before",
            "1",
            "--c-after",
            "1",
            "--strict-ordering",
            "true",
            "--seed",
            "1",
        ],
        &ev,
    );
    // Spike series on whole minutes: magnitude 1 at each event, 100 at the
    // shock, 0 elsewhere. Unit prefactors keep events about a minute apart.
    let times: Vec<i64> = std::fs::read_to_string(ev.join("omori_events.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.parse::<f64>().unwrap().round() as i64)
        .collect();
    let lo = *times.first().unwrap();
    let hi = *times.last().unwrap();
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    for t in &times {
        values[(t - lo) as usize] = if *t == 0 { 100.0 } else { 1.0 };
    }
    let mut text = String::from("x\n");
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    let series = dir.path().join("spikes.csv");
    std::fs::write(&series, text).unwrap();
    let om = dir.path().join("om");
    ok(
        &[
            "omori",
            "--input",
            series.to_str().unwrap(),
            "--thresholds",
            "0.001",
        ],
        &om,
    );
    let fit = std::fs::read_to_string(om.join("omori_fit.txt")).unwrap();
    let kv: std::collections::BTreeMap<&str, &str> = fit
        .split_whitespace()
        .filter_map(|t| t.split_once('='))
        .collect();
    let bb: f64 = kv["beta_b"].parse().unwrap();
    let ba: f64 = kv["beta_a"].parse().unwrap();
    assert!((bb - 0.5).abs() < 0.1 && (ba - 0.7).abs() < 0.1, "{fit}");
    assert!(om.join("omori_0.001.csv").is_file());
}
