// Temporary probe for the synthetic-benchmark behavior; deleted before release.
use fairsel::data::{FairnessKind, FairnessSpec};
use fairsel::dataio::synth_gaussian_2d;
use fairsel::irs::{irs_fit, BinaryModelKind, FittedBinary};
use fairsel::model::predict;
use fairsel::train::Schedule;
use fairsel::{fairness, HyperParams, TrainConfig};

fn realized(model: &FittedBinary<f64>, data: &fairsel::Dataset, spec: &FairnessSpec) -> (f64, f64) {
    let m = model.as_linear().unwrap();
    let preds = predict(m, data).unwrap();
    let z: Vec<bool> = preds.iter().zip(data.labels()).map(|(p, y)| p == y).collect();
    let acc = z.iter().filter(|&&b| b).count() as f64 / data.len() as f64;
    let f = fairness::evaluate::<f64>(&z, spec).unwrap();
    (acc, f)
}

#[test]
#[ignore]
fn probe_synthetic_irs() {
    for iters in [2000usize, 10000] {
        let mut accs = Vec::new();
        let mut fs = Vec::new();
        let mut vaccs = Vec::new();
        let mut vfs = Vec::new();
        for seed in 0..5u64 {
            let data = synth_gaussian_2d::<f64>(seed);
            let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
            let cfg = TrainConfig {
                iterations: iters,
                schedule: Schedule::InverseSqrt,
                seed,
                ..TrainConfig::default()
            };
            // Vanilla: rho = 0.
            let h0 = HyperParams::new(0.3, 0.0, 0.0).with_stopping(1e-6, 1);
            let vanilla = irs_fit(BinaryModelKind::Svm, &data, &h0, &spec, &cfg, None).unwrap();
            let (vacc, vf) = realized(&vanilla.model, &data, &spec);
            // Penalized run.
            let h = HyperParams::new(0.3, 0.0, 0.2).with_stopping(1e-6, 50);
            let out = irs_fit(BinaryModelKind::Svm, &data, &h, &spec, &cfg, None).unwrap();
            let (acc, f) = realized(&out.model, &data, &spec);
            let last = out.trace.iterations.last().unwrap();
            println!(
                "seed {seed} iters {iters}: vanilla acc {vacc:.3} F {vf:.3} | gsvmf acc {acc:.3} F {f:.3} selF {:.4} iters {} obj {:.4}",
                last.fairness, out.trace.len(), out.objective
            );
            accs.push(acc);
            fs.push(f);
            vaccs.push(vacc);
            vfs.push(vf);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "== iters {iters}: vanilla acc {:.3} F {:.3} | gsvmf acc {:.3} F {:.3}",
            mean(&vaccs),
            mean(&vfs),
            mean(&accs),
            mean(&fs)
        );
    }
}
