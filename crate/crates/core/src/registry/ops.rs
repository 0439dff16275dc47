//! Operator implementations and the standard catalog tables.

use std::collections::BTreeMap;

use super::{
    choice, opt, req, Alias, ArgKind as K, Args, ExecCtx, OpDef, Output, Param, Unimplemented,
};
use crate::constraint::{self, ConstraintKind, ConstraintSpec};
use crate::error::{OpError, OpResult};
use crate::io::parse_timestamp;
use crate::metrics;
use crate::models::{self, ModelName, ModelSpec, ScoreModel};
use crate::plan::Expr;
use crate::retrieval::{Location, Resolution, RetrievalQuery, SourceKind};
use crate::series::{Frame, TimeSeries};
use crate::stats::{self, Feature, FeatureValue, FnSpec, TestKind};
use crate::value::{Value, ValueKind};

const MODELS: &[&str] = &[
    "seasonal_naive",
    "drift",
    "holt_winters",
    "ar_ls",
    "theta",
    "lagged_regression",
];
const SCORE_MODELS: &[&str] = &["decomp_z", "ar_residual"];
const FNS: &[&str] = &["log", "diff", "zscore", "abs", "scale", "clip"];
const COMPONENTS: &[&str] = &["trend", "seasonal", "residual"];
const FEATURES: &[&str] = &[
    "trend_slope",
    "amplitude",
    "period",
    "sliding_variance",
    "volatility",
];
const TESTS: &[&str] = &["adf", "kpss", "ks", "ljung_box", "box"];
const CONSTRAINTS: &[&str] = &["max_load", "min_load", "ramp_rate", "variability"];
const RESOLUTIONS: &[&str] = &["hourly", "daily"];

/// Spike threshold in robust standard deviations when `z` is omitted.
const DEFAULT_SPIKE_Z: f64 = 3.5;
/// Granger lag order when `max_lag` is omitted.
pub const DEFAULT_CAUSAL_LAG: usize = 5;

const UNI_PARAMS: &[Param] = &[
    req("data", K::Series),
    req("future_length", K::Int),
    choice("model", false, MODELS),
    opt("period", K::Int),
    opt("ar_order", K::Int),
    opt("alpha", K::Scalar),
    opt("beta", K::Scalar),
    opt("gamma", K::Scalar),
    opt("ridge", K::Scalar),
    opt("fitted", K::Model),
];

const MULTI_PARAMS: &[Param] = &[
    req("data", K::Series),
    req("covariates", K::Frame),
    req("future_length", K::Int),
    choice("model", false, MODELS),
    opt("period", K::Int),
    opt("ar_order", K::Int),
    opt("alpha", K::Scalar),
    opt("beta", K::Scalar),
    opt("gamma", K::Scalar),
    opt("ridge", K::Scalar),
];

const BACKTEST_PARAMS: &[Param] = &[
    req("data", K::Series),
    opt("covariates", K::Frame),
    req("future_length", K::Int),
    choice("model", false, MODELS),
    opt("period", K::Int),
    opt("ar_order", K::Int),
    opt("alpha", K::Scalar),
    opt("beta", K::Scalar),
    opt("gamma", K::Scalar),
    opt("ridge", K::Scalar),
];

const CONSTRAINT_PARAMS: &[Param] = &[
    req("data", K::Series),
    choice("kind", true, CONSTRAINTS),
    req("value", K::Scalar),
    opt("anchor", K::SeriesOrScalar),
];

fn lit_str<'a>(args: &'a BTreeMap<String, Expr>, name: &str) -> Option<&'a str> {
    match args.get(name) {
        Some(Expr::Str(s)) => Some(s),
        _ => None,
    }
}

fn decompose_kind(args: &BTreeMap<String, Expr>) -> Option<ValueKind> {
    match args.get("component") {
        None => Some(ValueKind::Frame),
        Some(Expr::Str(_)) => Some(ValueKind::Series),
        Some(_) => None,
    }
}

fn feature_kind(args: &BTreeMap<String, Expr>) -> Option<ValueKind> {
    match lit_str(args, "kind")? {
        "sliding_variance" | "volatility" => Some(ValueKind::Series),
        _ => Some(ValueKind::Scalar),
    }
}

pub(super) fn catalog() -> Vec<OpDef> {
    use ValueKind as V;
    vec![
        OpDef {
            name: "forecast_uni",
            summary: "Forecast the next future_length points of a univariate series with the chosen model (default holt_winters). A fitted AR model may be passed instead.",
            params: UNI_PARAMS,
            output: Output::Fixed(V::Series),
            run: forecast_uni,
            forecast: true,
        },
        OpDef {
            name: "forecast_multi",
            summary: "Forecast a target series using lagged covariates (model lagged_regression by default; other models ignore covariates).",
            params: MULTI_PARAMS,
            output: Output::Fixed(V::Series),
            run: forecast_multi,
            forecast: true,
        },
        OpDef {
            name: "backtest",
            summary: "MAPE of a model forecasting the last future_length points of data from the points before them.",
            params: BACKTEST_PARAMS,
            output: Output::Fixed(V::Scalar),
            run: backtest,
            forecast: false,
        },
        OpDef {
            name: "anomaly_score",
            summary: "Nonnegative anomaly score per timestamp (decomposition residual z-score, or AR one-step error).",
            params: const { &[
                req("data", K::Series),
                choice("model", false, SCORE_MODELS),
                opt("period", K::Int),
                opt("fitted", K::Model),
            ] },
            output: Output::Fixed(V::Series),
            run: anomaly_score,
            forecast: false,
        },
        OpDef {
            name: "fit_ar",
            summary: "Fit an autoregressive model of the given order by least squares.",
            params: const { &[req("data", K::Series), req("order", K::Int)] },
            output: Output::Fixed(V::ModelHandle),
            run: fit_ar,
            forecast: false,
        },
        OpDef {
            name: "calibrate_threshold",
            summary: "Threshold mean + 3 standard deviations of scores computed on normal data.",
            params: const { &[req("data", K::Series)] },
            output: Output::Fixed(V::Scalar),
            run: calibrate_threshold,
            forecast: false,
        },
        OpDef {
            name: "threshold_to_binary",
            summary: "1 where the score exceeds the threshold, else 0. Give exactly one of threshold or percentile (fraction of points to flag).",
            params: const { &[req("data", K::Series), opt("threshold", K::Scalar), opt("percentile", K::Scalar)] },
            output: Output::Fixed(V::BinVec),
            run: threshold_to_binary,
            forecast: false,
        },
        OpDef {
            name: "detect_spikes",
            summary: "Indices whose deviation from the median exceeds z robust standard deviations.",
            params: const { &[req("data", K::Series), opt("z", K::Scalar)] },
            output: Output::Fixed(V::IntVec),
            run: detect_spikes,
            forecast: false,
        },
        OpDef {
            name: "causal_matrix",
            summary: "Matrix of Granger-causality p-values; entry (i, j) tests column i causing column j.",
            params: const { &[req("data", K::Frame), opt("max_lag", K::Int)] },
            output: Output::Fixed(V::Matrix),
            run: causal_matrix,
            forecast: false,
        },
        OpDef {
            name: "select_top_ratio",
            summary: "Binary adjacency marking the given fraction of variable pairs with the smallest p-values.",
            params: const { &[req("data", K::Matrix), req("ratio", K::Scalar)] },
            output: Output::Fixed(V::Matrix),
            run: select_top_ratio,
            forecast: false,
        },
        OpDef {
            name: "project",
            summary: "Adjust a forecast to satisfy a load constraint (clip, ramp clamp, or variance shrink). ramp_rate needs anchor, the last observed value or the history series.",
            params: CONSTRAINT_PARAMS,
            output: Output::Fixed(V::Series),
            run: project,
            forecast: false,
        },
        OpDef {
            name: "check_constraint",
            summary: "Indices at which a forecast violates a load constraint.",
            params: CONSTRAINT_PARAMS,
            output: Output::Fixed(V::IntVec),
            run: check_constraint,
            forecast: false,
        },
        OpDef {
            name: "apply",
            summary: "Elementwise transform: log, diff, zscore, abs, scale (factor c), clip (bounds lo, hi).",
            params: const { &[
                req("data", K::Series),
                choice("fn", true, FNS),
                opt("c", K::Scalar),
                opt("lo", K::Scalar),
                opt("hi", K::Scalar),
            ] },
            output: Output::Fixed(V::Series),
            run: apply,
            forecast: false,
        },
        OpDef {
            name: "concat",
            summary: "Columns of a followed by columns of b.",
            params: const { &[req("a", K::Frame), req("b", K::Frame)] },
            output: Output::Fixed(V::Frame),
            run: concat,
            forecast: false,
        },
        OpDef {
            name: "column",
            summary: "One named column of a frame.",
            params: const { &[req("data", K::Frame), req("name", K::Text)] },
            output: Output::Fixed(V::Series),
            run: column,
            forecast: false,
        },
        OpDef {
            name: "acf",
            summary: "Sample autocorrelations at lags 0..=max_lag.",
            params: const { &[req("data", K::Series), req("max_lag", K::Int)] },
            output: Output::Fixed(V::Series),
            run: acf,
            forecast: false,
        },
        OpDef {
            name: "max_corr_lag",
            summary: "Lag k in 0..=max_lag maximising |corr(x[t-k], y[t])|.",
            params: const { &[req("x", K::Series), req("y", K::Series), req("max_lag", K::Int)] },
            output: Output::Fixed(V::Scalar),
            run: max_corr_lag,
            forecast: false,
        },
        OpDef {
            name: "decompose",
            summary: "Additive trend/seasonal/residual decomposition; one component when component is given, else a frame of all three.",
            params: const { &[req("data", K::Series), opt("period", K::Int), choice("component", false, COMPONENTS)] },
            output: Output::Dynamic {
                describe: "frame|series",
                infer: decompose_kind,
            },
            run: decompose,
            forecast: false,
        },
        OpDef {
            name: "feature",
            summary: "Trend slope, amplitude or dominant period (number); sliding variance or volatility over window (series).",
            params: const { &[req("data", K::Series), choice("kind", true, FEATURES), opt("window", K::Int)] },
            output: Output::Dynamic {
                describe: "number|series",
                infer: feature_kind,
            },
            run: feature,
            forecast: false,
        },
        OpDef {
            name: "stat_test",
            summary: "adf (stationary), kpss (trend-stationary), ks (same distribution as other), ljung_box (white noise); verdict at the 5% level.",
            params: const { &[
                req("data", K::Series),
                choice("kind", true, TESTS),
                opt("other", K::Series),
                opt("lags", K::Int),
            ] },
            output: Output::Fixed(V::TestResult),
            run: stat_test,
            forecast: false,
        },
        OpDef {
            name: "mape",
            summary: "Mean absolute percentage error of predicted against actual.",
            params: const { &[req("actual", K::Series), req("predicted", K::Series)] },
            output: Output::Fixed(V::Scalar),
            run: mape,
            forecast: false,
        },
        OpDef {
            name: "fetch_weather",
            summary: "Weather variables (e.g. temperature_2m) at a location for [start, end).",
            params: const { &[
                req("latitude", K::Scalar),
                req("longitude", K::Scalar),
                req("start", K::Text),
                req("end", K::Text),
                req("variables", K::TextList),
                choice("resolution", false, RESOLUTIONS),
            ] },
            output: Output::Fixed(V::Frame),
            run: fetch_weather,
            forecast: false,
        },
        OpDef {
            name: "fetch_electricity",
            summary: "Electricity series (load, load_forecast, generation, interchange) for a zone code over [start, end).",
            params: const { &[
                req("zone", K::Text),
                req("start", K::Text),
                req("end", K::Text),
                opt("variables", K::TextList),
                choice("resolution", false, RESOLUTIONS),
            ] },
            output: Output::Fixed(V::Frame),
            run: fetch_electricity,
            forecast: false,
        },
    ]
}

pub(super) fn aliases() -> Vec<Alias> {
    let a = |name, target| Alias {
        name,
        target,
        preset: &[],
    };
    vec![
        a("UniPreOP", "forecast_uni"),
        a("MultiPreOP", "forecast_multi"),
        a("AnomalDetOP", "anomaly_score"),
        a("trainForecastOP", "fit_ar"),
        a("trainADOP", "fit_ar"),
        a("ApplyOP", "apply"),
        a("ConcatOP", "concat"),
        a("CausalMatrixOP", "causal_matrix"),
        a("thToBinaryOP", "threshold_to_binary"),
        a("convertBinaryOP", "threshold_to_binary"),
        a("calibrateThreshOP", "calibrate_threshold"),
        Alias {
            name: "checkStationaryOP",
            target: "stat_test",
            preset: &[("kind", "adf")],
        },
        Alias {
            name: "checkTrendStationaryOP",
            target: "stat_test",
            preset: &[("kind", "kpss")],
        },
        Alias {
            name: "compareDisOP",
            target: "stat_test",
            preset: &[("kind", "ks")],
        },
        Alias {
            name: "testWhiteNoiseOP",
            target: "stat_test",
            preset: &[("kind", "ljung_box")],
        },
        Alias {
            name: "getTrendOP",
            target: "decompose",
            preset: &[("component", "trend")],
        },
        Alias {
            name: "getNoiseCompOP",
            target: "decompose",
            preset: &[("component", "residual")],
        },
        a("decomposeOP", "decompose"),
        Alias {
            name: "getTrendCoefOP",
            target: "feature",
            preset: &[("kind", "trend_slope")],
        },
        Alias {
            name: "getAmplitudeOP",
            target: "feature",
            preset: &[("kind", "amplitude")],
        },
        Alias {
            name: "getPeriodOP",
            target: "feature",
            preset: &[("kind", "period")],
        },
        Alias {
            name: "getSlidingVarOP",
            target: "feature",
            preset: &[("kind", "sliding_variance")],
        },
        Alias {
            name: "VolDetOP",
            target: "feature",
            preset: &[("kind", "volatility")],
        },
        a("detectSpikesOP", "detect_spikes"),
        a("getAutoCorrOP", "acf"),
        a("getMaxCorrLagOP", "max_corr_lag"),
        a("getEnvDataOP", "fetch_weather"),
        a("getElectricityDataOP", "fetch_electricity"),
    ]
}

pub(super) fn unimplemented() -> Vec<Unimplemented> {
    vec![
        Unimplemented {
            name: "getChptOP",
            hint: "use detect_spikes or decompose to locate level changes",
        },
        Unimplemented {
            name: "getCyclePatternOP",
            hint: "use decompose(component=\"seasonal\") or feature(kind=\"period\")",
        },
        Unimplemented {
            name: "detectFlippedOP",
            hint: "use detect_spikes on apply(fn=\"diff\")",
        },
        Unimplemented {
            name: "detectSpeedUpDownOP",
            hint: "use feature(kind=\"sliding_variance\")",
        },
        Unimplemented {
            name: "detectCutoffOP",
            hint: "use detect_spikes",
        },
        Unimplemented {
            name: "RefGenOP",
            hint: "use project to make a forecast satisfy a constraint",
        },
    ]
}

fn model_spec(args: &Args, default: ModelName) -> OpResult<ModelSpec> {
    let name = match args.opt_text("model")? {
        Some(m) => ModelName::parse(m)?,
        None => default,
    };
    Ok(ModelSpec {
        name,
        period: args.opt_int("period")?,
        ar_order: args.opt_int("ar_order")?,
        alpha: args.opt_scalar("alpha")?,
        beta: args.opt_scalar("beta")?,
        gamma: args.opt_scalar("gamma")?,
        ridge: args.opt_scalar("ridge")?,
    })
}

fn horizon(args: &Args) -> OpResult<usize> {
    let h = args.int("future_length")?;
    if h == 0 {
        return Err(OpError::InvalidArgument(
            "future_length must be >= 1".into(),
        ));
    }
    Ok(h)
}

fn forecast_uni(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let h = horizon(args)?;
    if let Some(m) = args.opt_model("fitted")? {
        if data.len() < m.order() {
            return Err(OpError::HistoryTooShort {
                need: m.order(),
                got: data.len(),
            });
        }
        let mut hist = data.values().to_vec();
        for _ in 0..h {
            let next = m.predict_next(&hist);
            hist.push(next);
        }
        let values = hist.split_off(data.len());
        if values.iter().any(|v| !v.is_finite()) {
            return Err(OpError::DomainError(
                "fitted model produced a non-finite forecast".into(),
            ));
        }
        return Ok(Value::Series(TimeSeries::new(
            data.name.clone(),
            data.next_timestamp(),
            data.step_secs,
            values,
        )?));
    }
    let spec = model_spec(args, ModelName::HoltWinters)?;
    Ok(Value::Series(models::forecast_uni(data, h, &spec)?.values))
}

fn forecast_multi(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let cov = args.frame("covariates")?;
    let spec = model_spec(args, ModelName::LaggedRegression)?;
    Ok(Value::Series(
        models::forecast_multi(data, &cov, horizon(args)?, &spec)?.values,
    ))
}

fn backtest(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let cov = args.opt_frame("covariates")?;
    let default = if cov.is_some() {
        ModelName::LaggedRegression
    } else {
        ModelName::HoltWinters
    };
    let spec = model_spec(args, default)?;
    let q = models::backtest(data, cov.as_ref(), horizon(args)?, &spec)?;
    Ok(Value::Scalar(q.value))
}

fn anomaly_score(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let model = match args.opt_text("model")? {
        Some(m) => ScoreModel::parse(m)?,
        None if args.opt_model("fitted")?.is_some() => ScoreModel::ArResidual,
        None => ScoreModel::DecompZ,
    };
    let out = models::anomaly_score(
        args.series("data")?,
        model,
        args.opt_int("period")?,
        args.opt_model("fitted")?,
    )?;
    Ok(Value::Series(out))
}

fn fit_ar(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    Ok(Value::ModelHandle(models::fit_ar(
        args.series("data")?.values(),
        args.int("order")?,
    )?))
}

fn calibrate_threshold(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    Ok(Value::Scalar(stats::calibrate_threshold(
        args.series("data")?.values(),
    )?))
}

fn threshold_to_binary(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let bits = stats::threshold_to_binary(
        args.series("data")?.values(),
        args.opt_scalar("threshold")?,
        args.opt_scalar("percentile")?,
    )?;
    Value::bin_vec(bits)
}

fn detect_spikes(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let z = args.opt_scalar("z")?.unwrap_or(DEFAULT_SPIKE_Z);
    let idx = stats::detect_spikes(args.series("data")?.values(), z)?;
    Ok(Value::IntVec(idx.into_iter().map(|i| i as i64).collect()))
}

fn causal_matrix(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let lag = args.opt_int("max_lag")?.unwrap_or(DEFAULT_CAUSAL_LAG);
    Ok(Value::Matrix(stats::causal_matrix(
        &args.frame("data")?,
        lag,
    )?))
}

fn select_top_ratio(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    Ok(Value::Matrix(stats::select_top_ratio(
        args.matrix("data")?,
        args.scalar("ratio")?,
    )?))
}

fn constraint_spec(args: &Args) -> OpResult<ConstraintSpec> {
    let kind_text = args.text("kind")?;
    let kind = ConstraintKind::parse(kind_text).ok_or_else(|| {
        OpError::InvalidArgument(format!("unknown constraint kind `{kind_text}`"))
    })?;
    let mut spec = ConstraintSpec::new(kind, args.scalar("value")?);
    if let Some(a) = args.opt_anchor("anchor")? {
        spec = spec.with_anchor(a);
    }
    Ok(spec)
}

fn project(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let out = constraint::project(data.values(), &constraint_spec(args)?)?;
    Ok(Value::Series(data.with_values(0, out)?))
}

fn check_constraint(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let mut idx: Vec<i64> = constraint::check(data.values(), &constraint_spec(args)?)?
        .into_iter()
        .flat_map(|v| v.indices)
        .map(|i| i as i64)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    Ok(Value::IntVec(idx))
}

fn apply(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let need = |name: &str| {
        args.opt_scalar(name)?
            .ok_or_else(|| OpError::InvalidArgument(format!("fn needs argument `{name}`")))
    };
    let f = match args.text("fn")? {
        "log" => FnSpec::Log,
        "diff" => FnSpec::Diff,
        "zscore" => FnSpec::Zscore,
        "abs" => FnSpec::Abs,
        "scale" => FnSpec::Scale { c: need("c")? },
        "clip" => FnSpec::Clip {
            lo: need("lo")?,
            hi: need("hi")?,
        },
        other => return Err(OpError::InvalidArgument(format!("unknown fn `{other}`"))),
    };
    Ok(Value::Series(stats::apply(args.series("data")?, f)?))
}

fn concat(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    Ok(Value::Frame(stats::concat(
        &args.frame("a")?,
        &args.frame("b")?,
    )?))
}

fn column(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let frame = args.frame("data")?;
    let name = args.text("name")?;
    let col = frame.column(name).ok_or_else(|| {
        OpError::InvalidArgument(format!(
            "no column `{name}`; columns are {:?}",
            frame.names()
        ))
    })?;
    Ok(Value::Series(col.clone()))
}

fn acf(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let r = stats::acf(data.values(), args.int("max_lag")?)?;
    Ok(Value::Series(TimeSeries::new(
        "acf",
        data.start,
        data.step_secs,
        r,
    )?))
}

fn max_corr_lag(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let lag = stats::max_corr_lag(
        args.series("x")?.values(),
        args.series("y")?.values(),
        args.int("max_lag")?,
    )?;
    Ok(Value::Scalar(lag as f64))
}

fn decompose(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let period = models::resolve_period(data.values(), args.opt_int("period")?)?;
    let d = stats::decompose(data.values(), period)?;
    let series = |name: &str, v: Vec<f64>| -> OpResult<TimeSeries> {
        Ok(data.with_values(0, v)?.renamed(name))
    };
    match args.opt_text("component")? {
        None => Ok(Value::Frame(Frame::new(vec![
            series("trend", d.trend)?,
            series("seasonal", d.seasonal)?,
            series("residual", d.residual)?,
        ])?)),
        Some("trend") => Ok(Value::Series(series("trend", d.trend)?)),
        Some("seasonal") => Ok(Value::Series(series("seasonal", d.seasonal)?)),
        Some("residual") => Ok(Value::Series(series("residual", d.residual)?)),
        Some(other) => Err(OpError::InvalidArgument(format!(
            "unknown component `{other}`"
        ))),
    }
}

fn feature(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let data = args.series("data")?;
    let window = || {
        args.opt_int("window")?
            .ok_or_else(|| OpError::InvalidArgument("this feature needs argument `window`".into()))
    };
    let (kind, offset) = match args.text("kind")? {
        "trend_slope" => (Feature::TrendSlope, 0),
        "amplitude" => (Feature::Amplitude, 0),
        "period" => (Feature::Period, 0),
        "sliding_variance" => {
            let w = window()?;
            (Feature::SlidingVariance { window: w }, w.saturating_sub(1))
        }
        "volatility" => {
            let w = window()?;
            (Feature::Volatility { window: w }, w)
        }
        other => {
            return Err(OpError::InvalidArgument(format!(
                "unknown feature `{other}`"
            )))
        }
    };
    match stats::feature(data.values(), kind)? {
        FeatureValue::Scalar(x) => Ok(Value::Scalar(x)),
        FeatureValue::Series(v) => Ok(Value::Series(data.with_values(offset as i64, v)?)),
    }
}

fn stat_test(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    let kind_text = args.text("kind")?;
    let kind = TestKind::parse(kind_text)
        .ok_or_else(|| OpError::InvalidArgument(format!("unknown test `{kind_text}`")))?;
    let other = args.opt_series("other")?.map(TimeSeries::values);
    Ok(Value::TestResult(stats::stat_test(
        kind,
        args.series("data")?.values(),
        other,
        args.opt_int("lags")?,
    )?))
}

fn mape(args: &Args, _: &ExecCtx) -> OpResult<Value> {
    Ok(Value::Scalar(metrics::mape(
        args.series("actual")?.values(),
        args.series("predicted")?.values(),
    )?))
}

fn time_arg(args: &Args, name: &str) -> OpResult<chrono::NaiveDateTime> {
    let s = args.text(name)?;
    parse_timestamp(s)
        .ok_or_else(|| OpError::InvalidArgument(format!("`{name}` is not a timestamp: {s}")))
}

fn resolution(args: &Args) -> OpResult<Resolution> {
    match args.opt_text("resolution")? {
        None => Ok(Resolution::Hourly),
        Some(r) => Resolution::parse(r)
            .ok_or_else(|| OpError::InvalidArgument(format!("unknown resolution `{r}`"))),
    }
}

fn client<'a>(ctx: &ExecCtx<'a>) -> OpResult<&'a crate::retrieval::RetrievalClient> {
    ctx.retrieval.ok_or_else(|| OpError::Retrieval {
        code: "RetrievalUnavailable",
        message: "no data-retrieval client is configured for this run".into(),
    })
}

fn fetch_weather(args: &Args, ctx: &ExecCtx) -> OpResult<Value> {
    let q = RetrievalQuery {
        kind: SourceKind::Weather,
        location: Location::Point {
            lat: args.scalar("latitude")?,
            lon: args.scalar("longitude")?,
        },
        start: time_arg(args, "start")?,
        end: time_arg(args, "end")?,
        variables: args.text_list("variables")?,
        resolution: resolution(args)?,
    };
    Ok(Value::Frame(client(ctx)?.fetch_weather(&q)?))
}

fn fetch_electricity(args: &Args, ctx: &ExecCtx) -> OpResult<Value> {
    let variables = match args.get("variables") {
        Some(_) => args.text_list("variables")?,
        None => vec!["load".to_string()],
    };
    let q = RetrievalQuery {
        kind: SourceKind::Electricity,
        location: Location::Zone(args.text("zone")?.to_string()),
        start: time_arg(args, "start")?,
        end: time_arg(args, "end")?,
        variables,
        resolution: resolution(args)?,
    };
    Ok(Value::Frame(client(ctx)?.fetch_electricity(&q)?))
}
