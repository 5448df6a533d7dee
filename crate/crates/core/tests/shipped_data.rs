use std::path::Path;

use imc_dse::workload::{builtin, default_set, extended_set, largest_by_layer, largest_by_total, load_workloads};
use imc_dse::SearchSpace;

fn data(rel: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

#[test]
fn space_files_match_constructors() {
    for (file, space) in [
        ("default_rram.json", SearchSpace::default_rram()),
        ("default_sram.json", SearchSpace::default_sram()),
        ("tech_sweep_sram.json", SearchSpace::tech_sweep_sram()),
        ("reduced_rram.json", SearchSpace::reduced_rram()),
    ] {
        assert_eq!(SearchSpace::load(data(&format!("spaces/{file}"))).unwrap(), space, "{file}");
    }
}

#[test]
fn space_sizes() {
    assert_eq!(SearchSpace::default_rram().size(), 2_520_000);
    assert_eq!(SearchSpace::reduced_rram().size(), 375);
}

#[test]
fn workload_sets_match_builtins() {
    assert_eq!(load_workloads(data("workloads/default4.json")).unwrap(), default_set());
    assert_eq!(load_workloads(data("workloads/extended9.json")).unwrap(), extended_set());
    let names: Vec<String> = default_set().into_iter().map(|w| w.name).collect();
    assert_eq!(names, ["resnet18", "vgg16", "alexnet", "mobilenetv3"]);
    assert_eq!(extended_set().len(), 9);
}

#[test]
fn vgg16_fc6_is_the_largest_layer() {
    // 25088 inputs × 4096 outputs, 8-bit weights at one bit per cell
    let vgg = builtin("vgg16").unwrap();
    assert_eq!(vgg.largest_layer_cells(1), 25_088 * 4_096 * 8);
    assert_eq!(vgg.largest_layer_cells(1), 822_083_584);
    let set = default_set();
    assert_eq!(set[largest_by_layer(&set, 1).unwrap()].name, "vgg16");
    assert_eq!(set[largest_by_total(&set, 1).unwrap()].name, "vgg16");
}

#[test]
fn known_parameter_counts() {
    // weight counts of the dense layers only (no biases, no norms)
    let gpt = builtin("gpt2_medium").unwrap();
    let lm_head = gpt.layers.iter().find(|l| l.name == "lm_head").unwrap();
    assert_eq!(lm_head.cells(1), 1_024 * 50_257 * 8);
    assert_eq!(builtin("alexnet").unwrap().total_weights(), 61_100_840 - 10_344);
    assert_eq!(builtin("vgg16").unwrap().total_weights(), 138_357_544 - 13_416);
    assert_eq!(builtin("resnet18").unwrap().total_weights(), 11_689_512 - 9_600 - 1_000);
}
