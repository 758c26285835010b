//! Synthetic inputs for end-to-end runs without market data.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ingest::{business_days, DatedColumns, PriceObservation, PriceSeries};

const FUEL_DAILY_VOL: f64 = 0.02;

/// Prices on consecutive business days from `start`, beginning at `p0` and
/// compounding `returns`; one more price than returns.
pub fn prices_from_returns(returns: &[f64], start: NaiveDate, p0: f64) -> Result<PriceSeries> {
    if !(p0 > 0.0) {
        return Err(Error::param("p0", format!("{p0} must be positive")));
    }
    let dates = business_days(start, returns.len() + 1);
    let mut price = p0;
    let mut obs = vec![PriceObservation {
        date: dates[0],
        price,
        is_roll_day: false,
    }];
    for (d, r) in dates[1..].iter().zip(returns) {
        price *= r.exp();
        obs.push(PriceObservation {
            date: *d,
            price,
            is_roll_day: false,
        });
    }
    PriceSeries::new(obs)
}

/// Independent geometric random walks, one per name, on the given dates.
pub fn simulate_fuels(dates: &[NaiveDate], names: &[&str], seed: u64) -> DatedColumns {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = names
        .iter()
        .map(|_| {
            let mut p = 50.0_f64;
            dates
                .iter()
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    p *= (FUEL_DAILY_VOL * z).exp();
                    p
                })
                .collect()
        })
        .collect();
    DatedColumns {
        dates: dates.to_vec(),
        names: names.iter().map(|s| s.to_string()).collect(),
        values,
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes `date,price[,roll]` rows; the roll column appears only when a roll day exists.
pub fn write_prices(p: &PriceSeries, path: &Path) -> Result<()> {
    let rolls = p.observations().iter().any(|o| o.is_roll_day);
    let mut text = String::from(if rolls { "date,price,roll\n" } else { "date,price\n" });
    for o in p.observations() {
        let _ = write!(text, "{},{}", o.date, o.price);
        if rolls {
            let _ = write!(text, ",{}", u8::from(o.is_roll_day));
        }
        text.push('\n');
    }
    write(path, &text)
}

pub fn write_dated_columns(c: &DatedColumns, path: &Path) -> Result<()> {
    let mut text = format!("date,{}\n", c.names.join(","));
    for (i, d) in c.dates.iter().enumerate() {
        let _ = write!(text, "{d}");
        for col in &c.values {
            let _ = write!(text, ",{}", col[i]);
        }
        text.push('\n');
    }
    write(path, &text)
}
