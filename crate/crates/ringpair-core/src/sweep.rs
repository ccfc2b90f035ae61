//! Parameter-sweep orchestration and dataset emission.
//!
//! A sweep evaluates one quantity over a 1- or 2-axis grid. Every grid
//! point is a pure function of the base configuration and the axis
//! coordinates, so results are independent of evaluation order; points
//! may run in parallel (capped by `RINGPAIR_THREADS`, 0 = auto) and the
//! output is assembled strictly by grid index. Pole or otherwise
//! non-evaluable points are flagged and the sweep continues.
//!
//! CSV layout: first line `# config-hash: <hex>`, second line the column
//! headers, then data rows; 17 significant digits, LF endings. The JSON
//! form carries the same content plus the config echo and version, with
//! non-finite values encoded as the strings "inf", "-inf", "nan".

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::biphoton::{
    biphoton_state, car, herald, pair_rate, populations,
};
use crate::commutators::{commutators_closed_form, solve_commutators_numeric};
use crate::config::{apply_axis, ParsedConfig, Quantity, SweepParam};
use crate::error::{Error, Result};
use crate::highq::{limit_report, LimitReport, LIMIT_QUANTITIES};
use crate::transfer::{intracavity_transfer, output_transfer, TransferPair};

/// Per-row evaluation status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    Ok,
    /// The point could not be evaluated (pole or degenerate relation);
    /// its value columns hold `nan`.
    Pole,
}

impl RowFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::Pole => "pole",
        }
    }
}

/// A computed sweep dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub config_hash: String,
    pub version: String,
    pub config_echo: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub flags: Vec<RowFlag>,
    /// Extra key/value results (fitted convergence orders); JSON only.
    pub annotations: Vec<(String, String)>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        let bits = |rows: &Vec<Vec<f64>>| -> Vec<Vec<u64>> {
            rows.iter()
                .map(|r| r.iter().map(|v| v.to_bits()).collect())
                .collect()
        };
        self.config_hash == other.config_hash
            && self.version == other.version
            && self.config_echo == other.config_echo
            && self.columns == other.columns
            && bits(&self.rows) == bits(&other.rows)
            && self.flags == other.flags
            && self.annotations == other.annotations
    }
}

impl Dataset {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All `ok` rows hold finite values, except the documented CAR
    /// sentinel (+∞ in a `car` column).
    pub fn finite_except_sentinel(&self) -> bool {
        self.rows.iter().zip(&self.flags).all(|(row, flag)| {
            *flag == RowFlag::Pole
                || row.iter().zip(&self.columns).all(|(v, col)| {
                    v.is_finite() || (*v == f64::INFINITY && col == "car")
                })
        })
    }
}

/// Canonical hash of the resolved configuration echo.
pub fn config_hash(echo: &[(String, String)]) -> String {
    let mut hasher = Sha256::new();
    for (key, value) in echo {
        hasher.update(key.as_bytes());
        hasher.update(b" = ");
        hasher.update(value.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn value_columns(quantity: Quantity) -> Vec<String> {
    match quantity {
        Quantity::PairRateMrr | Quantity::PairRateOut => vec!["psi2_abs2".into(), "pair_rate".into()],
        Quantity::CarMrr | Quantity::CarOut => vec!["car".into()],
        Quantity::HeraldMrr | Quantity::HeraldOut => vec!["herald".into()],
        Quantity::Populations => vec!["p0".into(), "p1a".into(), "p1b".into(), "p2".into()],
        Quantity::TransferEntry => {
            let mut cols = Vec::new();
            for matrix in ["g", "h"] {
                for entry in ["aa", "ab", "ba", "bb"] {
                    cols.push(format!("{matrix}_{entry}_re"));
                    cols.push(format!("{matrix}_{entry}_im"));
                }
            }
            cols.push("d_re".into());
            cols.push("d_im".into());
            cols
        }
        Quantity::Commutators => {
            vec!["c_aa".into(), "c_bb".into(), "d_ab_re".into(), "d_ab_im".into()]
        }
        Quantity::LimitReport => {
            let mut cols = vec!["t".into(), "gamma_t".into()];
            cols.extend(LIMIT_QUANTITIES.iter().map(|q| format!("err_{q}")));
            cols
        }
    }
}

/// Evaluate one grid point; pure in (config, coordinates).
pub fn evaluate_point(
    cfg: &ParsedConfig,
    quantity: Quantity,
    coords: &[(SweepParam, f64)],
) -> (Vec<f64>, RowFlag) {
    let n_values = value_columns(quantity).len();
    let mut scenario = cfg.scenario.clone();
    for (param, value) in coords {
        scenario = apply_axis(&scenario, *param, *value);
    }
    let result = (|| -> Result<Vec<f64>> {
        let system = scenario.system()?;
        let omega = scenario.omega()?;
        let output_pair = |sys, om| -> Result<TransferPair> { output_transfer(sys, om) };
        let values = match quantity {
            Quantity::PairRateMrr | Quantity::PairRateOut => {
                let pair = if quantity == Quantity::PairRateMrr {
                    intracavity_transfer(&system, omega)?
                } else {
                    output_pair(&system, omega)?
                };
                let comms = commutators_closed_form(&system);
                let state = biphoton_state(&pair, &comms, system.pump.effective_phase());
                vec![state.psi2.norm_sqr(), pair_rate(&system, &state)]
            }
            Quantity::CarMrr | Quantity::CarOut => {
                let pair = if quantity == Quantity::CarMrr {
                    intracavity_transfer(&system, omega)?
                } else {
                    output_pair(&system, omega)?
                };
                let comms = commutators_closed_form(&system);
                let state = biphoton_state(&pair, &comms, system.pump.effective_phase());
                vec![car(&state, &comms)]
            }
            Quantity::HeraldMrr | Quantity::HeraldOut => {
                let pair = if quantity == Quantity::HeraldMrr {
                    intracavity_transfer(&system, omega)?
                } else {
                    output_pair(&system, omega)?
                };
                let comms = commutators_closed_form(&system);
                let state = biphoton_state(&pair, &comms, system.pump.effective_phase());
                vec![herald(&state, &comms)]
            }
            Quantity::Populations => {
                let pair = output_pair(&system, omega)?;
                let comms = commutators_closed_form(&system);
                let state = biphoton_state(&pair, &comms, system.pump.effective_phase());
                let p = populations(&system, &state, &comms);
                vec![p.p0, p.p1a, p.p1b, p.p2]
            }
            Quantity::TransferEntry => {
                let pair = output_pair(&system, omega)?;
                let mut values = Vec::with_capacity(18);
                for matrix in [&pair.g, &pair.h] {
                    for entry in matrix.entries() {
                        values.push(entry.re);
                        values.push(entry.im);
                    }
                }
                values.push(pair.denominator.re);
                values.push(pair.denominator.im);
                values
            }
            Quantity::Commutators => {
                let pair = output_pair(&system, omega)?;
                let set = solve_commutators_numeric(&pair)?;
                vec![set.c_aa, set.c_bb, set.d_ab.re, set.d_ab.im]
            }
            Quantity::LimitReport => {
                return Err(Error::validation(
                    "limit_report is evaluated over the limits grid, not per point",
                ))
            }
        };
        Ok(values)
    })();
    match result {
        Ok(values) => (values, RowFlag::Ok),
        Err(_) => (vec![f64::NAN; n_values], RowFlag::Pole),
    }
}

fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let cap = std::env::var("RINGPAIR_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match cap {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .unwrap_or_else(|_| panic!("failed to build sweep thread pool")),
        None => f(),
    }
}

/// Run the configured sweep into a deterministic dataset.
pub fn run_sweep(cfg: &ParsedConfig) -> Result<Dataset> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::validation("configuration has no sweep section"))?;

    if spec.quantity == Quantity::LimitReport {
        let study = cfg.limits.as_ref().ok_or_else(|| {
            Error::validation("sweep.quantity = limit_report needs the limits.* section")
        })?;
        let report = limit_report(study)?;
        return Ok(limit_dataset(&report, &cfg.echo));
    }

    let axes = &spec.axes;
    let counts: Vec<usize> = axes.iter().map(|a| a.count).collect();
    let total: usize = counts.iter().product();

    let mut columns: Vec<String> = axes.iter().map(|a| a.param.as_str().to_string()).collect();
    columns.extend(value_columns(spec.quantity));
    columns.push("flag".into());

    let evaluated: Vec<(Vec<f64>, RowFlag)> = with_thread_cap(|| {
        (0..total)
            .into_par_iter()
            .map(|k| {
                let coords: Vec<(SweepParam, f64)> = match axes.len() {
                    1 => vec![(axes[0].param, axes[0].value(k))],
                    _ => {
                        let (i, j) = (k / counts[1], k % counts[1]);
                        vec![
                            (axes[0].param, axes[0].value(i)),
                            (axes[1].param, axes[1].value(j)),
                        ]
                    }
                };
                let (values, flag) = evaluate_point(cfg, spec.quantity, &coords);
                let mut row: Vec<f64> = coords.iter().map(|(_, v)| *v).collect();
                row.extend(values);
                (row, flag)
            })
            .collect()
    });

    let (rows, flags) = evaluated.into_iter().unzip();
    Ok(Dataset {
        config_hash: config_hash(&cfg.echo),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_echo: cfg.echo.clone(),
        columns,
        rows,
        flags,
        annotations: Vec::new(),
    })
}

/// Convert a convergence report into a dataset (used by both the
/// `limit_report` sweep quantity and the `limits` subcommand).
pub fn limit_dataset(report: &LimitReport, echo: &[(String, String)]) -> Dataset {
    let mut columns = value_columns(Quantity::LimitReport);
    columns.push("flag".into());
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.t, r.gamma_t];
            row.extend(r.errors);
            row
        })
        .collect();
    let flags = vec![RowFlag::Ok; rows.len()];
    let mut annotations: Vec<(String, String)> = report
        .orders
        .iter()
        .map(|(name, order)| {
            (
                format!("order.{name}"),
                order.map_or_else(|| "exact".to_string(), |o| format!("{o:.6}")),
            )
        })
        .collect();
    annotations.sort();
    Dataset {
        config_hash: config_hash(echo),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_echo: echo.to_vec(),
        columns,
        rows,
        flags,
        annotations,
    }
}

/// 17-significant-digit rendering; round-trips f64 exactly.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn parse_value(s: &str) -> Result<f64> {
    match s {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::validation(format!("bad numeric value '{other}'"))),
    }
}

/// Emit the CSV form.
pub fn emit_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    out.push_str("# config-hash: ");
    out.push_str(&dataset.config_hash);
    out.push('\n');
    out.push_str(&dataset.columns.join(","));
    out.push('\n');
    for (row, flag) in dataset.rows.iter().zip(&dataset.flags) {
        let mut fields: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        fields.push(flag.as_str().to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Emit the JSON form: identical content plus echo, version and
/// annotations; keys in stable (sorted) order.
pub fn emit_json(dataset: &Dataset) -> String {
    use serde_json::{json, Map, Value};

    let number = |v: f64| -> Value {
        if v.is_finite() {
            json!(v)
        } else {
            Value::String(format_value(v))
        }
    };
    let mut config = Map::new();
    for (k, v) in &dataset.config_echo {
        config.insert(k.clone(), Value::String(v.clone()));
    }
    let mut annotations = Map::new();
    for (k, v) in &dataset.annotations {
        annotations.insert(k.clone(), Value::String(v.clone()));
    }
    let rows: Vec<Value> = dataset
        .rows
        .iter()
        .map(|row| Value::Array(row.iter().map(|v| number(*v)).collect()))
        .collect();
    let flags: Vec<Value> = dataset
        .flags
        .iter()
        .map(|f| Value::String(f.as_str().to_string()))
        .collect();
    let doc = json!({
        "annotations": Value::Object(annotations),
        "columns": dataset.columns,
        "config": Value::Object(config),
        "config_hash": dataset.config_hash,
        "flags": flags,
        "rows": rows,
        "version": dataset.version,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("dataset serialization");
    text.push('\n');
    text
}

/// Parse the JSON form back; `dataset_from_json(emit_json(d)) == d`.
pub fn dataset_from_json(text: &str) -> Result<Dataset> {
    use serde_json::Value;

    let doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::validation(format!("bad dataset JSON: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::validation("dataset JSON must be an object"))?;
    let field = |name: &str| -> Result<&Value> {
        obj.get(name)
            .ok_or_else(|| Error::validation(format!("dataset JSON missing '{name}'")))
    };
    let string_of = |v: &Value| -> Result<String> {
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::validation("expected string"))
    };

    let columns = field("columns")?
        .as_array()
        .ok_or_else(|| Error::validation("'columns' must be an array"))?
        .iter()
        .map(string_of)
        .collect::<Result<Vec<_>>>()?;
    let rows = field("rows")?
        .as_array()
        .ok_or_else(|| Error::validation("'rows' must be an array"))?
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::validation("row must be an array"))?
                .iter()
                .map(|v| match v {
                    Value::Number(n) => n
                        .as_f64()
                        .ok_or_else(|| Error::validation("non-f64 number in row")),
                    Value::String(s) => parse_value(s),
                    _ => Err(Error::validation("row values must be numbers or strings")),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flags = field("flags")?
        .as_array()
        .ok_or_else(|| Error::validation("'flags' must be an array"))?
        .iter()
        .map(|v| {
            Ok(match v.as_str() {
                Some("ok") => RowFlag::Ok,
                Some("pole") => RowFlag::Pole,
                _ => return Err(Error::validation("flags must be 'ok' or 'pole'")),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = |v: &Value| -> Result<Vec<(String, String)>> {
        Ok(v.as_object()
            .ok_or_else(|| Error::validation("expected object"))?
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string()))
            .collect())
    };
    Ok(Dataset {
        config_hash: string_of(field("config_hash")?)?,
        version: string_of(field("version")?)?,
        config_echo: pairs(field("config")?)?,
        columns,
        rows,
        flags,
        annotations: pairs(field("annotations")?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const THETA_SWEEP: &str = "\
mode.rho = 0.95
mode.alpha = 0.99
pump.r = 1e-5
sweep.quantity = pair_rate_mrr
axis1.name = theta
axis1.min = 0.0
axis1.max = 6.283185307179586
axis1.count = 21
";

    #[test]
    fn sweep_is_deterministic() {
        let cfg = parse_config(THETA_SWEEP).unwrap();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(emit_csv(&a), emit_csv(&b));
        assert_eq!(a.rows.len(), 21);
        assert!(a.finite_except_sentinel());
    }

    #[test]
    fn grid_points_match_standalone_evaluation() {
        let cfg = parse_config(THETA_SWEEP).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        let spec = cfg.sweep.as_ref().unwrap();
        for (k, row) in dataset.rows.iter().enumerate() {
            let theta = spec.axes[0].value(k);
            let (values, flag) =
                evaluate_point(&cfg, spec.quantity, &[(SweepParam::Theta, theta)]);
            assert_eq!(flag, RowFlag::Ok);
            assert_eq!(row[0].to_bits(), theta.to_bits());
            for (a, b) in row[1..].iter().zip(&values) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn two_axis_sweep_row_order_and_count() {
        let text = "\
mode.alpha = 0.99
pump.r = 1e-5
sweep.quantity = herald_mrr
axis1.name = rho
axis1.min = 0.5
axis1.max = 0.9
axis1.count = 3
axis2.name = theta
axis2.min = 0.0
axis2.max = 1.0
axis2.count = 2
";
        let cfg = parse_config(text).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        assert_eq!(dataset.rows.len(), 6);
        // Row-major: axis1 outer, axis2 inner.
        assert_eq!(dataset.rows[0][0], 0.5);
        assert_eq!(dataset.rows[1][0], 0.5);
        assert_eq!(dataset.rows[2][0], 0.7);
        assert_eq!(dataset.rows[0][1], 0.0);
        assert_eq!(dataset.rows[1][1], 1.0);
    }

    #[test]
    fn pole_rows_flagged_and_sweep_continues() {
        // rho sweep reaching 1.0: the intracavity relation is undefined at
        // tau = 0, so the last row is flagged and the rest are fine.
        let text = "\
mode.alpha = 0.99
pump.r = 1e-5
sweep.quantity = pair_rate_mrr
axis1.name = rho
axis1.min = 0.5
axis1.max = 1.0
axis1.count = 6
";
        let cfg = parse_config(text).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        assert_eq!(dataset.flags[5], RowFlag::Pole);
        assert!(dataset.rows[5][1].is_nan());
        assert!(dataset.flags[..5].iter().all(|f| *f == RowFlag::Ok));
        assert!(dataset.finite_except_sentinel());
    }

    #[test]
    fn car_sentinel_only_at_lossless_zero() {
        // Lossless ring, no pump: the accidental denominator is exactly
        // zero and every row carries the CAR sentinel.
        let text = "\
mode.alpha = 1.0
pump.r = 0
detuning.theta = 0.5
sweep.quantity = car_mrr
axis1.name = gamma_T
axis1.min = 0.01
axis1.max = 0.2
axis1.count = 4
";
        let cfg = parse_config(text).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        let car_col = dataset.column_index("car").unwrap();
        for row in &dataset.rows {
            assert_eq!(row[car_col], f64::INFINITY);
        }
        assert!(dataset.finite_except_sentinel());
        // Any internal loss: finite CAR everywhere.
        let lossy = parse_config(&text.replace("mode.alpha = 1.0", "mode.alpha = 0.99")).unwrap();
        let dataset = run_sweep(&lossy).unwrap();
        for row in &dataset.rows {
            assert!(row[car_col].is_finite());
        }
    }

    #[test]
    fn car_columns_constant_in_theta() {
        let text = "\
mode.rho = 0.95
mode.alpha = 0.99
pump.r = 1e-5
sweep.quantity = car_mrr
axis1.name = theta
axis1.min = 0.0
axis1.max = 6.283185307179586
axis1.count = 51
";
        let cfg = parse_config(text).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        let car_col = dataset.column_index("car").unwrap();
        let first = dataset.rows[0][car_col];
        for row in &dataset.rows {
            assert!((row[car_col] - first).abs() / first < 1e-10);
        }
    }

    #[test]
    fn csv_shape_and_json_round_trip() {
        let cfg = parse_config(THETA_SWEEP).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        let csv = emit_csv(&dataset);
        let mut lines = csv.lines();
        let first = lines.next().unwrap();
        assert!(first.starts_with("# config-hash: "));
        assert_eq!(first.len(), "# config-hash: ".len() + 64);
        assert_eq!(lines.next().unwrap(), dataset.columns.join(","));
        assert_eq!(csv.lines().count(), 2 + dataset.rows.len());
        assert!(!csv.contains('\r'));

        let json = emit_json(&dataset);
        let parsed = dataset_from_json(&json).unwrap();
        assert_eq!(parsed, dataset);
    }

    #[test]
    fn format_value_17_digits() {
        assert_eq!(format_value(1.0), "1.0000000000000000e0");
        assert_eq!(format_value(f64::INFINITY), "inf");
        assert_eq!(format_value(f64::NAN), "nan");
        let v = 0.123_456_789_012_345_67;
        assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn limit_report_dataset() {
        let text = "\
sweep.quantity = limit_report
limits.gamma = 1.0
limits.gamma_int = 0.3
limits.g_alpha_p = 1e-5
limits.omega = 0.2
limits.t_start = 1e-2
limits.points = 4
";
        let cfg = parse_config(text).unwrap();
        let dataset = run_sweep(&cfg).unwrap();
        assert_eq!(dataset.rows.len(), 4);
        assert!(dataset.annotations.iter().any(|(k, _)| k == "order.c_kk"));
        assert!(dataset.finite_except_sentinel());
        let json = emit_json(&dataset);
        assert_eq!(dataset_from_json(&json).unwrap(), dataset);
    }
}
