//! Every example runs to completion.

macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        #[path = $file]
        mod $module;

        #[test]
        fn $module() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(channel_statistics, "../examples/channel_statistics.rs");
example!(sinr_and_mrc, "../examples/sinr_and_mrc.rs");
example!(port_selection, "../examples/port_selection.rs");
example!(dataset, "../examples/dataset.rs");
example!(train_ltc, "../examples/train_ltc.rs");
example!(hpo_study, "../examples/hpo_study.rs");
example!(outage_curves, "../examples/outage_curves.rs");
example!(class_sweep, "../examples/class_sweep.rs");
example!(full_pipeline, "../examples/full_pipeline.rs");
