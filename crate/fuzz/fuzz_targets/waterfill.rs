#![no_main]
use libfuzzer_sys::fuzz_target;
use mirelay::spectrum::waterfill_weighted;

// bytes are read as (k, width) f64 pairs; the first value is the budget
fuzz_target!(|data: &[u8]| {
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let Some((&budget, rest)) = values.split_first() else {
        return;
    };
    let (k, w): (Vec<f64>, Vec<f64>) = rest.chunks_exact(2).map(|p| (p[0], p[1])).unzip();
    if let Ok(wf) = waterfill_weighted(&k, &w, budget) {
        assert!(wf.psd.iter().all(|p| *p >= 0.0));
        let used: f64 = wf.psd.iter().zip(&w).map(|(p, w)| p * w).sum();
        if used.is_finite() && budget > 0.0 {
            assert!((used - budget).abs() <= 1e-6 * budget, "used {used} of {budget}");
        }
    }
});
