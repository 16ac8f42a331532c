// scratch experiment (deleted before ship)
use co2cast::evaluation::{default_arima_grid, grid_search, ModelCandidate};
use co2cast::ingest::AnnualSeries;
use co2cast::models::{simulate_arma, ArimaOrder, ModelSpecConfig};

fn restricted_grid() -> Vec<ModelCandidate> {
    let mut grid = Vec::new();
    for d in 0..=1 { for p in 0..=2 { for q in 0..=2 {
        grid.push(ModelCandidate::Arima(ArimaOrder { p, d, q }));
    } } }
    grid
}

fn main() {
    let reps = 100;
    let mut parsimonious = 0;
    for seed in 0..reps {
        let data = simulate_arma(ArimaOrder { p: 0, d: 0, q: 0 }, &[], &[], 1.0, 200, 1000 + seed).unwrap();
        let data: Vec<f64> = data.iter().map(|v| v + 100.0).collect();
        let series = AnnualSeries::new("TST", 2000, data);
        let outcome = grid_search(&series, &restricted_grid(), 0.8).unwrap();
        if let ModelSpecConfig::Arima { order } = outcome.row.config {
            if order.p + order.q <= 1 { parsimonious += 1; }
        }
    }
    println!("white noise n=200: p+q<=1 in {parsimonious}/{reps}");

    let mut with_ar = 0;
    for seed in 0..reps {
        let data = simulate_arma(ArimaOrder { p: 1, d: 0, q: 0 }, &[0.7], &[], 1.0, 200, 5000 + seed).unwrap();
        let data: Vec<f64> = data.iter().map(|v| v + 100.0).collect();
        let series = AnnualSeries::new("TST", 2000, data);
        let outcome = grid_search(&series, &default_arima_grid(), 0.8).unwrap();
        if let ModelSpecConfig::Arima { order } = outcome.row.config {
            if order.p >= 1 { with_ar += 1; }
        }
    }
    println!("AR(1) n=200: p>=1 in {with_ar}/{reps}");
}
