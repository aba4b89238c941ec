use nodalkit_core::basis::{
    analyze_eigenspace, construct_signed_basis, validate_signed_basis, ConstructionConfig, StructureConfig,
    ValidationConfig,
};
use nodalkit_core::fixtures::example16;
use nodalkit_core::spectral::{eigendecompose, group_eigenvalues, DEFAULT_GROUP_TOL};
use serde_json::Value;

#[test]
fn basis_json_uses_short_field_names() {
    let m = example16();
    let spec = eigendecompose(&m).unwrap();
    let g = group_eigenvalues(&spec, DEFAULT_GROUP_TOL).into_iter().max_by_key(|g| g.multiplicity_r).unwrap();
    let st = analyze_eigenspace(&m, &g, &StructureConfig::default()).unwrap();
    let res = construct_signed_basis(&m, &g, &st, &ConstructionConfig::default()).unwrap();
    let rep = validate_signed_basis(&m, &g, &res, res.f, &ValidationConfig::default()).unwrap();

    let v: Value = serde_json::to_value(&res).unwrap();
    assert_eq!(v["vectors"][0]["N"], 8);
    assert_eq!(v["vectors"][0]["bound"], 9);
    assert_eq!(v["vectors"][0]["eps"].as_array().unwrap().len(), 16);
    let r: Value = serde_json::to_value(&rep).unwrap();
    assert_eq!(r["vectors"][0]["exactN"], true);
    assert_eq!(r["vectors"][0]["status"], "Holds");

    let back: nodalkit_core::basis::SignedBasisResult = serde_json::from_value(v).unwrap();
    assert_eq!(back, res);
}
