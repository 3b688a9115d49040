use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use log::info;
use serde_json::{json, Value};

use super::summary::{digest, raster_digests, sidecar, stack_digests, write_summary};
use super::*;
use crate::coherence::{detect_low_to_high, event_components, events_to_components, CoherenceStack, EventParams};
use crate::fire_analysis::{
    anomaly_zscores, daily_counts, detect_off_season, export_daily_comparison, off_season_counts, AnomalyParams,
    AutoSeasonParams, OffSeasonWindows, StdKind,
};
use crate::firms::{filter_by_dates, parse_firms_csv, FireCatalog, ParseMode, ParseOptions};
use crate::geodata::io::{create_parent, write_json};
use crate::geodata::{quicklook, read_raster, read_stack, write_raster};
use crate::sar_change::{run_change_detection, ChangeParams, Direction, InputScale, LogBase};
use crate::spatial_stats::{
    auto_grid, kde2d, mutual_information, parse_local_crs, project_local, resolve_bandwidth, Bandwidth,
};
use crate::synthgen::{
    gen_backscatter_stack, gen_coherence_stack, gen_fire_catalog, gen_settlements, read_spec, settlements_geojson,
    CoherenceSceneSpec, FireSceneSpec, SarSceneSpec, SettlementSpec,
};

struct Progress(bool);

impl Progress {
    fn step(&self, msg: impl AsRef<str>) {
        info!("{}", msg.as_ref());
        if self.0 {
            println!("{}", msg.as_ref());
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let p = Progress(cli.progress);
    match &cli.command {
        Command::Fires(FiresCmd::Counts(a)) => fires_counts(a, &p),
        Command::Fires(FiresCmd::Anomaly(a)) => fires_anomaly(a, &p),
        Command::Fires(FiresCmd::Compare(a)) => fires_compare(a, &p),
        Command::Fires(FiresCmd::Kde(a)) => fires_kde(a, &p),
        Command::Stats(StatsCmd::Mi(a)) => stats_mi(a, &p),
        Command::Sar(SarCmd::Logratio(a)) => sar_logratio(a, &p),
        Command::Sar(SarCmd::Coherence(a)) => sar_coherence(a, &p),
        Command::Simulate(a) => simulate(a, &p),
        Command::Quicklook(a) => {
            let r = read_raster(&a.raster)?;
            quicklook(&r, &a.out)?;
            p.step(format!("wrote {}", a.out.display()));
            Ok(())
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_options(bbox: Option<BBox>, min_confidence: Option<f64>, instrument: &Option<String>, lenient: bool) -> ParseOptions {
    ParseOptions {
        bbox,
        min_confidence,
        instrument: instrument.clone(),
        mode: if lenient { ParseMode::Lenient } else { ParseMode::Strict },
    }
}

fn load_catalog(path: &Path, opts: &ParseOptions, p: &Progress) -> Result<FireCatalog> {
    let cat = parse_firms_csv(path, opts)?;
    p.step(format!(
        "read {}: {} kept, {} filtered, {} skipped",
        path.display(),
        cat.detections.len(),
        cat.filtered,
        cat.skipped
    ));
    Ok(cat)
}

fn catalog_stats(cat: &FireCatalog) -> Value {
    json!({"retained": cat.detections.len(), "filtered": cat.filtered, "skipped": cat.skipped})
}

fn year_span(cat: &FireCatalog) -> Result<(NaiveDate, NaiveDate)> {
    let years = cat.detections.iter().map(|d| d.acq_date.year());
    let (lo, hi) = years.fold((i32::MAX, i32::MIN), |(a, b), y| (a.min(y), b.max(y)));
    if lo > hi {
        return Err(Error::InsufficientData("catalog has no detections; pass --start and --end".into()));
    }
    Ok((
        NaiveDate::from_ymd_opt(lo, 1, 1).expect("valid year"),
        NaiveDate::from_ymd_opt(hi, 12, 31).expect("valid year"),
    ))
}

fn fires_counts(a: &CountsArgs, p: &Progress) -> Result<()> {
    let c = &a.catalog;
    let opts = parse_options(c.bbox, c.min_confidence, &c.instrument, c.lenient);
    let cat = load_catalog(&c.csv, &opts, p)?;
    let series = daily_counts(&cat.detections, a.start, a.end)?;
    write_text(&a.out, &series.to_csv())?;
    let mut results = catalog_stats(&cat);
    results["total"] = json!(series.total());
    write_summary(
        &sidecar(&a.out),
        "fires counts",
        &[digest(&c.csv)?],
        json!({"start": a.start, "end": a.end, "parse": to_value(&opts)}),
        results,
    )?;
    p.step(format!("wrote {}", a.out.display()));
    Ok(())
}

fn read_yearly_counts(path: &Path) -> Result<BTreeMap<i32, u64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: BTreeMap<String, u64> = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<i32>()
                .map(|y| (y, v))
                .map_err(|_| Error::Validation(format!("{}: '{k}' is not a year", path.display())))
        })
        .collect()
}

fn fires_anomaly(a: &AnomalyArgs, p: &Progress) -> Result<()> {
    let anomaly = AnomalyParams {
        z_threshold: a.z_threshold,
        include_target: !a.leave_one_out,
        std_kind: if a.sample_std { StdKind::Sample } else { StdKind::Population },
    };
    let auto = AutoSeasonParams {
        min_gap_days: a.min_gap_days,
        smooth_window: a.smooth_window,
        eps: a.eps,
        fallback: a.months,
    };
    let mut params = json!({
        "anomaly": to_value(&anomaly),
        "mode": match a.mode { ModeArg::Fixed => "fixed", ModeArg::Auto => "auto" },
        "months": to_value(&a.months),
    });
    let mut extra = json!({});
    let (inputs, yearly) = match (&a.yearly_counts, &a.csv) {
        (Some(path), _) => (vec![digest(path)?], read_yearly_counts(path)?),
        (None, Some(csv)) => {
            let opts = parse_options(a.bbox, a.min_confidence, &a.instrument, a.lenient);
            let cat = load_catalog(csv, &opts, p)?;
            let (s0, e0) = match (a.start, a.end) {
                (Some(s), Some(e)) => (s, e),
                (s, e) => {
                    let (ds, de) = year_span(&cat)?;
                    (s.unwrap_or(ds), e.unwrap_or(de))
                }
            };
            let series = daily_counts(&cat.detections, s0, e0)?;
            let windows = match a.mode {
                ModeArg::Fixed => OffSeasonWindows::fixed(&series, a.months)?,
                ModeArg::Auto => {
                    let per_year = detect_off_season(&series, &auto)?;
                    extra["detected_windows"] = to_value(&per_year.windows);
                    extra["consensus"] = to_value(&per_year.consensus());
                    if a.per_year_windows {
                        per_year
                    } else {
                        per_year.consensus_windows(a.months)?
                    }
                }
            };
            params["parse"] = to_value(&opts);
            params["start"] = json!(s0);
            params["end"] = json!(e0);
            if a.mode == ModeArg::Auto {
                params["auto"] = to_value(&auto);
                params["per_year_windows"] = json!(a.per_year_windows);
            }
            extra["windows"] = to_value(&windows.windows);
            extra["catalog"] = catalog_stats(&cat);
            (vec![digest(csv)?], off_season_counts(&series, &windows)?)
        }
        (None, None) => return Err(Error::InvalidParams("need --csv or --yearly-counts".into())),
    };
    let report = anomaly_zscores(&yearly, &anomaly)?;
    let mut results = json!({
        "years": to_value(&report.years),
        "mean": report.mean,
        "std": report.std,
        "flagged_years": report.flagged_years(),
    });
    if let (Some(r), Value::Object(e)) = (results.as_object_mut(), extra) {
        r.extend(e);
    }
    write_summary(&a.out, "fires anomaly", &inputs, params, results)?;
    p.step(format!("flagged {:?}; wrote {}", report.flagged_years(), a.out.display()));
    Ok(())
}

fn fires_compare(a: &CompareArgs, p: &Progress) -> Result<()> {
    let c = &a.catalog;
    let opts = parse_options(c.bbox, c.min_confidence, &c.instrument, c.lenient);
    let cat = load_catalog(&c.csv, &opts, p)?;
    let (y0, y1) = (a.year_a.min(a.year_b), a.year_a.max(a.year_b) + 1);
    let bad_year = || Error::InvalidParams(format!("years {} / {} out of range", a.year_a, a.year_b));
    let start = NaiveDate::from_ymd_opt(y0, 1, 1).ok_or_else(bad_year)?;
    let end = NaiveDate::from_ymd_opt(y1, 12, 31).ok_or_else(bad_year)?;
    let series = daily_counts(&cat.detections, start, end)?;
    let cmp = export_daily_comparison(&series, a.year_a, a.year_b, a.start_month)?;
    write_text(&a.out, &cmp.to_csv())?;
    let sum = |f: fn(&crate::fire_analysis::ComparisonRow) -> u64| cmp.rows.iter().map(f).sum::<u64>();
    write_summary(
        &sidecar(&a.out),
        "fires compare",
        &[digest(&c.csv)?],
        json!({"year_a": a.year_a, "year_b": a.year_b, "start_month": a.start_month, "parse": to_value(&opts)}),
        json!({"rows": cmp.rows.len(), "total_a": sum(|r| r.count_a), "total_b": sum(|r| r.count_b), "catalog": catalog_stats(&cat)}),
    )?;
    p.step(format!("wrote {}", a.out.display()));
    Ok(())
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParams(format!("{what} must be two comma-separated numbers, got '{s}'"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    let x: f64 = x.trim().parse().map_err(|_| bad())?;
    let y: f64 = y.trim().parse().map_err(|_| bad())?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(bad());
    }
    Ok((x, y))
}

fn geojson_points(path: &Path, bbox: Option<BBox>) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let features = doc["features"]
        .as_array()
        .ok_or_else(|| Error::Validation(format!("{}: not a FeatureCollection", path.display())))?;
    let mut out = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let g = &f["geometry"];
        let c = g["coordinates"].as_array().filter(|_| g["type"] == "Point");
        let xy = c.and_then(|c| Some((c.first()?.as_f64()?, c.get(1)?.as_f64()?)));
        let (lon, lat) = xy.ok_or_else(|| Error::Validation(format!("{}: feature {i} is not a Point", path.display())))?;
        if bbox.is_none_or(|b| b.contains(lon, lat)) {
            out.push((lon, lat));
        }
    }
    Ok(out)
}

fn fires_kde(a: &KdeArgs, p: &Progress) -> Result<()> {
    let (lonlat, inputs, source) = match (&a.csv, &a.points) {
        (Some(csv), _) => {
            let opts = parse_options(a.bbox, a.min_confidence, &a.instrument, a.lenient);
            let cat = load_catalog(csv, &opts, p)?;
            let dets = match (a.start, a.end) {
                (None, None) => cat.detections,
                (s, e) => filter_by_dates(
                    &cat.detections,
                    s.unwrap_or(NaiveDate::MIN),
                    e.unwrap_or(NaiveDate::MAX),
                )?,
            };
            let pts: Vec<(f64, f64)> = dets.iter().map(|d| (d.lon, d.lat)).collect();
            (pts, vec![digest(csv)?], json!({"csv": to_value(&opts)}))
        }
        (None, Some(points)) => (geojson_points(points, a.bbox)?, vec![digest(points)?], json!({"points": {"bbox": a.bbox}})),
        (None, None) => return Err(Error::InvalidParams("need --csv or --points".into())),
    };
    if lonlat.is_empty() {
        return Err(Error::InsufficientData("no points left after filtering".into()));
    }
    let bandwidth = if a.bandwidth.eq_ignore_ascii_case("scott") {
        Bandwidth::Scott
    } else {
        let (hx, hy) = parse_pair(&a.bandwidth, "--bandwidth")?;
        Bandwidth::Fixed { hx, hy }
    };

    let mut inputs = inputs;
    let (ps, grid) = match &a.grid_from {
        Some(path) => {
            let template = read_raster(path)?;
            inputs.extend(raster_digests(path)?);
            let origin = parse_local_crs(&template.grid().crs).ok_or_else(|| {
                Error::Validation(format!("{}: grid is not in a local KDE frame", path.display()))
            })?;
            (project_local(&lonlat, Some(origin))?, template.grid().clone())
        }
        None => {
            let origin = match (&a.origin, a.bbox) {
                (Some(o), _) => Some(parse_pair(o, "--origin")?),
                (None, Some(b)) => Some(b.center()),
                (None, None) => None,
            };
            let ps = project_local(&lonlat, origin)?;
            let (hx, hy) = resolve_bandwidth(&ps, bandwidth)?;
            let grid = auto_grid(&[&ps], a.cell, a.pad_bandwidths * hx.max(hy))?;
            (ps, grid)
        }
    };
    let (hx, hy) = resolve_bandwidth(&ps, bandwidth)?;
    p.step(format!("kde of {} points on {}x{} cells", ps.len(), grid.width, grid.height));
    let density = kde2d(&ps, &grid, bandwidth)?;
    write_raster(&density, &a.out)?;
    write_summary(
        &sidecar(&a.out),
        "fires kde",
        &inputs,
        json!({
            "source": source,
            "start": a.start,
            "end": a.end,
            "bandwidth": to_value(&bandwidth),
            "cell": a.cell,
            "pad_bandwidths": a.pad_bandwidths,
            "origin": ps.origin(),
        }),
        json!({"n_points": ps.len(), "hx": hx, "hy": hy, "grid": to_value(&grid)}),
    )?;
    p.step(format!("wrote {}", a.out.display()));
    Ok(())
}

fn stats_mi(a: &MiArgs, p: &Progress) -> Result<()> {
    let (ra, rb) = (read_raster(&a.a)?, read_raster(&a.b)?);
    let m = mutual_information(&ra, &rb, a.bins)?;
    let mut inputs = raster_digests(&a.a)?;
    inputs.extend(raster_digests(&a.b)?);
    write_summary(
        &a.out,
        "stats mi",
        &inputs,
        json!({"bins": a.bins}),
        json!({"mi_nats": m.mi_nats, "bins": m.bins, "entropy_a": m.entropy_a, "entropy_b": m.entropy_b}),
    )?;
    p.step(format!("I = {} nats; wrote {}", m.mi_nats, a.out.display()));
    Ok(())
}

fn sar_logratio(a: &LogratioArgs, p: &Progress) -> Result<()> {
    let stack = read_stack(&a.manifest)?;
    p.step(format!("read {} layers from {}", stack.len(), a.manifest.display()));
    let params = ChangeParams {
        threshold: a.threshold,
        direction: match a.direction {
            DirectionArg::Decrease => Direction::Decrease,
            DirectionArg::Increase => Direction::Increase,
            DirectionArg::Both => Direction::Both,
        },
        input_scale: match a.input_scale {
            ScaleArg::Linear => InputScale::Linear,
            ScaleArg::Db => InputScale::Db,
        },
        log_base: match a.log_base {
            LogBaseArg::E => LogBase::Natural,
            LogBaseArg::Ten => LogBase::Ten,
            LogBaseArg::Two => LogBase::Two,
        },
        min_area_px: a.min_area_px,
        min_cluster_px: a.min_cluster_px,
        ref_start: a.ref_start,
        ref_end: a.ref_end,
    };
    let out = run_change_detection(&stack, &params)?;
    let dir = &a.out_dir;
    write_text(&dir.join("series.csv"), &out.series.to_csv())?;
    write_raster(&out.reference, dir.join("reference.json"))?;
    write_raster(&out.cumulative, dir.join("cumulative_mask.json"))?;
    write_raster(&out.change_dates, dir.join("change_date.json"))?;
    if !a.no_window_masks {
        for m in &out.maps {
            let end = m.window.map(|w| w.1).expect("windows are dated");
            write_raster(&m.to_raster()?, dir.join("windows").join(format!("mask_{end}.json")))?;
        }
    }
    write_summary(
        &dir.join("summary.json"),
        "sar logratio",
        &stack_digests(&a.manifest)?,
        to_value(&params),
        json!({
            "first_detection_date": out.series.first_detection_date,
            "total_area_m2": out.series.total_area_m2,
            "windows": out.series.rows.len(),
            "valid_reference_pixels": out.reference.valid_count(),
        }),
    )?;
    p.step(format!(
        "first detection {:?}, total area {} m2; wrote {}",
        out.series.first_detection_date,
        out.series.total_area_m2,
        dir.display()
    ));
    Ok(())
}

fn sar_coherence(a: &CoherenceArgs, p: &Progress) -> Result<()> {
    let stack = CoherenceStack::new(read_stack(&a.manifest)?)?;
    p.step(format!("read {} coherence layers", stack.stack().len()));
    let params = EventParams {
        tau_low: a.tau_low,
        tau_high: a.tau_high,
        persistence_k: a.persistence,
        baseline_n: a.baseline_n,
        baseline_end: a.baseline_end,
    };
    let events = detect_low_to_high(&stack, &params)?;
    let dir = &a.out_dir;
    write_raster(&events.to_raster()?, dir.join("event_date.json"))?;
    write_json(&dir.join("events.geojson"), &events_to_components(&events, a.min_component_px))?;
    let mut p_json = to_value(&params);
    p_json["min_component_px"] = json!(a.min_component_px);
    write_summary(
        &dir.join("summary.json"),
        "sar coherence",
        &stack_digests(&a.manifest)?,
        p_json,
        json!({
            "event_pixels": events.event_count(),
            "eligible_pixels": events.valid.iter().filter(|&&v| v).count(),
            "components": event_components(&events, a.min_component_px).len(),
        }),
    )?;
    p.step(format!("{} event pixels; wrote {}", events.event_count(), dir.display()));
    Ok(())
}

fn spec_or_default<T: serde::de::DeserializeOwned + Default>(path: &Option<std::path::PathBuf>) -> Result<(T, Vec<summary::InputDigest>)> {
    match path {
        Some(p) => Ok((read_spec(p)?, vec![digest(p)?])),
        None => Ok((T::default(), Vec::new())),
    }
}

fn simulate(a: &SimulateArgs, p: &Progress) -> Result<()> {
    let dir = &a.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary_path = dir.join("summary.json");
    match a.kind {
        SceneKind::Fires => {
            let (mut spec, inputs): (FireSceneSpec, _) = spec_or_default(&a.spec)?;
            spec.seed = a.seed.unwrap_or(spec.seed);
            let scene = gen_fire_catalog(&spec)?;
            scene.write(dir)?;
            let t = &scene.truth;
            write_summary(
                &summary_path,
                "simulate fires",
                &inputs,
                to_value(&spec),
                json!({"total": t.total, "agricultural_total": t.agricultural_total, "anomalous_total": t.anomalous_total}),
            )?;
            p.step(format!("{} detections", t.total));
        }
        SceneKind::Settlements => {
            let (mut spec, inputs): (SettlementSpec, _) = spec_or_default(&a.spec)?;
            spec.seed = a.seed.unwrap_or(spec.seed);
            let pts = gen_settlements(spec.n, &spec.bbox, spec.seed)?;
            write_json(&dir.join("settlements.geojson"), &settlements_geojson(&pts))?;
            write_json(&dir.join("truth.json"), &json!({"n": pts.len(), "bbox": spec.bbox, "seed": spec.seed, "points": pts}))?;
            write_summary(&summary_path, "simulate settlements", &inputs, to_value(&spec), json!({"n": pts.len()}))?;
            p.step(format!("{} settlements", pts.len()));
        }
        SceneKind::Backscatter => {
            let (mut spec, inputs): (SarSceneSpec, _) = spec_or_default(&a.spec)?;
            spec.seed = a.seed.unwrap_or(spec.seed);
            let scene = gen_backscatter_stack(&spec)?;
            scene.write(dir)?;
            write_summary(&summary_path, "simulate backscatter", &inputs, to_value(&spec), to_value(&scene.truth))?;
            p.step(format!("{} layers", scene.stack.len()));
        }
        SceneKind::Coherence => {
            let (mut spec, inputs): (CoherenceSceneSpec, _) = spec_or_default(&a.spec)?;
            spec.seed = a.seed.unwrap_or(spec.seed);
            let scene = gen_coherence_stack(&spec)?;
            scene.write(dir)?;
            write_summary(&summary_path, "simulate coherence", &inputs, to_value(&spec), json!({"onset_index": scene.truth.onset_index, "footprint_pixels": scene.truth.footprint_pixels}))?;
            p.step(format!("{} layers", scene.stack.len()));
        }
    }
    Ok(())
}
