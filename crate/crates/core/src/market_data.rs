//! Price ingestion, log returns, descriptive statistics and chronological splits.
//!
//! Prices come from a CSV with a `date` (ISO-8601) and a `close` column; any
//! other columns are ignored. Missing calendar days are not imputed, the
//! series is treated as evenly spaced in trading time.

use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from unordered observations. Rows are sorted by date;
    /// duplicate dates and non-positive closes are rejected.
    pub fn new(mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InsufficientData("price series is empty".into()));
        }
        if let Some((d, c)) = rows.iter().find(|(_, c)| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Domain(format!("non-positive close {c} on {d}")));
        }
        rows.sort_by_key(|(d, _)| *d);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain(format!("duplicate date {}", w[0].0)));
        }
        if rows.len() < 2 {
            return Err(Error::InsufficientData(
                "price series needs at least two observations".into(),
            ));
        }
        let (dates, closes) = rows.into_iter().unzip();
        Ok(Self { dates, closes })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    /// Writes `date,close` rows.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "close"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for (d, c) in self.dates.iter().zip(&self.closes) {
            w.write_record([d.to_string(), format!("{c:.10}")])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::Dimension(format!(
                "{} dates for {} returns",
                dates.len(),
                returns.len()
            )));
        }
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::Domain(format!("non-finite return at index {i}")));
        }
        Ok(Self { dates, returns })
    }

    /// Attaches consecutive weekday dates starting at `start`.
    pub fn with_business_days(start: NaiveDate, returns: Vec<f64>) -> Result<Self> {
        let dates = business_days(start, returns.len());
        Self::new(dates, returns)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> ReturnSeries {
        ReturnSeries {
            dates: self.dates[range.clone()].to_vec(),
            returns: self.returns[range].to_vec(),
        }
    }

    /// Rebuilds a price path from `initial` by exponentiating cumulative returns.
    /// The first price is dated one business day before the first return.
    pub fn to_prices(&self, initial: f64) -> Result<PriceSeries> {
        let first = self
            .dates
            .first()
            .copied()
            .ok_or_else(|| Error::InsufficientData("empty return series".into()))?;
        let mut rows = Vec::with_capacity(self.len() + 1);
        rows.push((previous_business_day(first), initial));
        let mut log_p = initial.ln();
        for (d, r) in self.dates.iter().zip(&self.returns) {
            log_p += r;
            rows.push((*d, log_p.exp()));
        }
        PriceSeries::new(rows)
    }
}

/// Quotes a CSV field when it holds a comma, quote or line break.
pub(crate) fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}

pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

fn previous_business_day(d: NaiveDate) -> NaiveDate {
    let mut p = d - Duration::days(1);
    while matches!(p.weekday(), Weekday::Sat | Weekday::Sun) {
        p -= Duration::days(1);
    }
    p
}

pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_prices(file)
}

pub fn read_prices<R: Read>(reader: R) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(Error::InsufficientData("empty price file".into()));
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse(format!("missing `{name}` column")))
    };
    let date_col = column("date")?;
    let close_col = column("close")?;

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let field = |c: usize| {
            record
                .get(c)
                .ok_or_else(|| Error::Parse(format!("line {line}: too few fields")))
        };
        let date = NaiveDate::parse_from_str(field(date_col)?, "%Y-%m-%d")
            .map_err(|e| Error::Parse(format!("line {line}: bad date: {e}")))?;
        let close: f64 = field(close_col)?
            .parse()
            .map_err(|e| Error::Parse(format!("line {line}: bad close: {e}")))?;
        rows.push((date, close));
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("price file has no data rows".into()));
    }
    PriceSeries::new(rows)
}

/// `r[t] = ln(close[t+1] / close[t])`, dated at the later close.
pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData(
            "log returns need at least two prices".into(),
        ));
    }
    let returns = prices
        .closes
        .windows(2)
        .map(|w| (w[1] / w[0]).ln())
        .collect();
    ReturnSeries::new(prices.dates[1..].to_vec(), returns)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub observations: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub median: f64,
    /// Excess kurtosis (zero for a normal sample).
    pub kurtosis: f64,
    pub skewness: f64,
    pub maximum: f64,
    pub minimum: f64,
}

/// Sample statistics of a return series. The standard deviation uses the
/// `n - 1` denominator; skewness and excess kurtosis are the moment ratios
/// `m3 / m2^1.5` and `m4 / m2^2 - 3` of the central moments.
pub fn describe(returns: &ReturnSeries) -> Result<DescriptiveStats> {
    describe_values(returns.values())
}

pub fn describe_values(x: &[f64]) -> Result<DescriptiveStats> {
    let n = x.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "descriptive statistics need at least 4 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std_dev = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };

    Ok(DescriptiveStats {
        observations: n,
        mean,
        std_dev,
        median,
        kurtosis,
        skewness,
        maximum: sorted[n - 1],
        minimum: sorted[0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_len: usize,
    pub val_len: usize,
    pub test_len: usize,
}

impl SplitSpec {
    pub const DEFAULT_VAL_LEN: usize = 252;
    pub const DEFAULT_TEST_LEN: usize = 252;

    pub fn new(train_len: usize, val_len: usize, test_len: usize) -> Result<Self> {
        if train_len == 0 || val_len == 0 || test_len == 0 {
            return Err(Error::InvalidParameter(format!(
                "split lengths must be positive, got ({train_len}, {val_len}, {test_len})"
            )));
        }
        Ok(Self {
            train_len,
            val_len,
            test_len,
        })
    }

    /// Uses the default 252/252 validation/test tail and gives the rest to training.
    pub fn default_for(total: usize) -> Result<Self> {
        let tail = Self::DEFAULT_VAL_LEN + Self::DEFAULT_TEST_LEN;
        if total <= tail {
            return Err(Error::InsufficientData(format!(
                "{total} observations leave no training data after a {tail}-point tail"
            )));
        }
        Self::new(total - tail, Self::DEFAULT_VAL_LEN, Self::DEFAULT_TEST_LEN)
    }

    pub fn total(&self) -> usize {
        self.train_len + self.val_len + self.test_len
    }

    pub fn in_sample_len(&self) -> usize {
        self.train_len + self.val_len
    }

    pub fn train_range(&self) -> std::ops::Range<usize> {
        0..self.train_len
    }

    pub fn val_range(&self) -> std::ops::Range<usize> {
        self.train_len..self.in_sample_len()
    }

    pub fn test_range(&self) -> std::ops::Range<usize> {
        self.in_sample_len()..self.total()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: ReturnSeries,
    pub val: ReturnSeries,
    pub test: ReturnSeries,
}

pub fn split(returns: &ReturnSeries, spec: SplitSpec) -> Result<Split> {
    if spec.total() != returns.len() {
        return Err(Error::Dimension(format!(
            "split lengths sum to {} but the series has {} observations",
            spec.total(),
            returns.len()
        )));
    }
    Ok(Split {
        train: returns.slice(spec.train_range()),
        val: returns.slice(spec.val_range()),
        test: returns.slice(spec.test_range()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(closes: &[f64]) -> PriceSeries {
        let dates = business_days(d("2020-01-01"), closes.len());
        PriceSeries::new(dates.into_iter().zip(closes.iter().copied()).collect()).unwrap()
    }

    #[test]
    fn parses_three_rows() {
        let csv = "date,close\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n";
        let p = read_prices(csv.as_bytes()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.closes(), &[100.0, 110.0, 99.0]);
    }

    #[test]
    fn extra_columns_are_ignored() {
        let csv = "open,Date,volume,Close\n1,2020-01-01,5,100\n1,2020-01-02,5,101\n";
        let p = read_prices(csv.as_bytes()).unwrap();
        assert_eq!(p.closes(), &[100.0, 101.0]);
    }

    #[test]
    fn rejects_negative_close() {
        let csv = "date,close\n2020-01-01,100\n2020-01-02,-5\n";
        assert!(matches!(read_prices(csv.as_bytes()), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_duplicate_dates() {
        let csv = "date,close\n2020-01-01,100\n2020-01-01,101\n";
        assert!(matches!(read_prices(csv.as_bytes()), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_empty_and_malformed() {
        assert!(read_prices("".as_bytes()).is_err());
        assert!(read_prices("date,close\n".as_bytes()).is_err());
        let bad = "date,close\n2020-01-01,abc\n2020-01-02,1\n";
        assert!(matches!(read_prices(bad.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn shuffled_rows_sort() {
        let sorted = "date,close\n2020-01-01,100\n2020-01-02,110\n2020-01-03,99\n";
        let shuffled = "date,close\n2020-01-03,99\n2020-01-01,100\n2020-01-02,110\n";
        assert_eq!(
            read_prices(sorted.as_bytes()).unwrap(),
            read_prices(shuffled.as_bytes()).unwrap()
        );
    }

    #[test]
    fn log_return_examples() {
        let e = std::f64::consts::E;
        let r = log_returns(&series(&[1.0, e, e * e])).unwrap();
        assert!((r.values()[0] - 1.0).abs() < 1e-15);
        assert!((r.values()[1] - 1.0).abs() < 1e-15);

        let r = log_returns(&series(&[5.0, 5.0, 5.0])).unwrap();
        assert_eq!(r.values(), &[0.0, 0.0]);

        let r = log_returns(&series(&[100.0, 110.0])).unwrap();
        assert!((r.values()[0] - 0.095_310_179_804_324_87).abs() < 1e-15);
        assert_eq!(r.dates()[0], series(&[100.0, 110.0]).dates()[1]);
    }

    #[test]
    fn describe_symmetric_series() {
        let s = describe_values(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(s.skewness, 0.0);
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.median, 0.0);
        assert!(describe_values(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn describe_matches_direct_summation() {
        let x = [
            0.012, -0.004, 0.021, -0.017, 0.003, 0.0, -0.009, 0.031, -0.026, 0.008,
        ];
        // Independent two-pass evaluation with explicit powers.
        let n = x.len() as f64;
        let mean: f64 = x.iter().sum::<f64>() / n;
        let c = |k: i32| x.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / n;
        let var_unbiased = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let skew = c(3) / c(2).powf(1.5);
        let kurt = c(4) / c(2).powi(2) - 3.0;

        let s = describe_values(&x).unwrap();
        assert_eq!(s.observations, 10);
        assert!((s.mean - mean).abs() < 1e-15);
        assert!((s.std_dev - var_unbiased.sqrt()).abs() < 1e-15);
        assert!((s.skewness - skew).abs() < 1e-12);
        assert!((s.kurtosis - kurt).abs() < 1e-12);
        assert_eq!(s.maximum, 0.031);
        assert_eq!(s.minimum, -0.026);
        assert!((s.median - 0.0015).abs() < 1e-15);
    }

    #[test]
    fn describe_serializes_eight_fields() {
        let s = describe_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let v = serde_json::to_value(s).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 8);
    }

    #[test]
    fn split_examples() {
        let r = ReturnSeries::with_business_days(d("2010-01-04"), vec![0.01; 2960]).unwrap();
        let s = split(&r, SplitSpec::new(2456, 252, 252).unwrap()).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (2456, 252, 252));
        assert_eq!(SplitSpec::default_for(2960).unwrap().train_len, 2456);

        let r = ReturnSeries::with_business_days(d("2010-01-04"), (0..10).map(f64::from).collect())
            .unwrap();
        let s = split(&r, SplitSpec::new(8, 1, 1).unwrap()).unwrap();
        assert_eq!(s.val.values(), &[8.0]);
        assert_eq!(s.test.values(), &[9.0]);

        assert!(split(&r, SplitSpec::new(8, 1, 2).unwrap()).is_err());
        assert!(SplitSpec::new(0, 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn split_concatenation_reproduces_input(
            x in prop::collection::vec(-0.1f64..0.1, 3..60),
            a in 1usize..20, b in 1usize..20,
        ) {
            prop_assume!(a + b < x.len());
            let r = ReturnSeries::with_business_days(d("2015-06-01"), x.clone()).unwrap();
            let s = split(&r, SplitSpec::new(a, b, x.len() - a - b).unwrap()).unwrap();
            let mut joined = s.train.values().to_vec();
            joined.extend_from_slice(s.val.values());
            joined.extend_from_slice(s.test.values());
            prop_assert_eq!(joined, x);
        }

        #[test]
        fn log_returns_invert_cumulative_exp(x in prop::collection::vec(-0.2f64..0.2, 1..80)) {
            let r = ReturnSeries::with_business_days(d("2001-02-05"), x.clone()).unwrap();
            let back = log_returns(&r.to_prices(100.0).unwrap()).unwrap();
            for (a, b) in back.values().iter().zip(&x) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn describe_is_permutation_invariant(
            x in prop::collection::vec(-1.0f64..1.0, 4..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut y = x.clone();
            y.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = describe_values(&x).unwrap();
            let b = describe_values(&y).unwrap();
            prop_assert_eq!(a.median, b.median);
            prop_assert_eq!(a.maximum, b.maximum);
            prop_assert_eq!(a.minimum, b.minimum);
            prop_assert!((a.mean - b.mean).abs() < 1e-14);
            prop_assert!((a.std_dev - b.std_dev).abs() < 1e-12);
            prop_assert!((a.skewness - b.skewness).abs() < 1e-8);
            prop_assert!((a.kurtosis - b.kurtosis).abs() < 1e-8);
        }
    }
}
