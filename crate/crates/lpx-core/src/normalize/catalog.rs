//! Built-in catalog of solvable extensions up to order four: the canonical
//! tensors of the low-order classification, with precomputed fingerprints.

use super::{normalize_block, solvable_fingerprint, Fingerprint};
use crate::exactfield::Scalar;
use crate::extension::{BasisChange, ExtensionTensor};
use std::sync::OnceLock;

/// One catalog case: canonical tensor, fingerprint, pipeline normal form
/// (used to compose explicit witnesses), and a pointer into the Casimir
/// tables.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub case_id: String,
    pub tensor: ExtensionTensor,
    pub fingerprint: Fingerprint,
    /// Pipeline normal form of `tensor` and the basis change reaching it.
    pub nf_tensor: ExtensionTensor,
    pub nf_basis: BasisChange,
    pub casimir_table_ref: String,
}

fn entry(case_id: &str, tensor: ExtensionTensor, table: &str) -> CatalogEntry {
    let fingerprint = solvable_fingerprint(&tensor);
    let nb = normalize_block(&tensor).expect("catalog tensor normalizes");
    CatalogEntry {
        case_id: case_id.to_string(),
        tensor,
        fingerprint,
        nf_tensor: nb.tensor,
        nf_basis: nb.basis,
        casimir_table_ref: table.to_string(),
    }
}

/// Sets the symmetric pair `W_l^{mn} = W_l^{nm} = 1` (storage indices).
fn sym(t: &mut ExtensionTensor, l: usize, m: usize, n: usize) {
    t.set(l, m, n, Scalar::one());
    t.set(l, n, m, Scalar::one());
}

fn build() -> Vec<CatalogEntry> {
    let mut out = Vec::new();

    // Order 2 (order 1 is always reported as abelian without a lookup).
    out.push(entry("n2-1", ExtensionTensor::abelian(2), "order 2: f(v1, v2)"));
    out.push(entry(
        "n2-2",
        ExtensionTensor::leibniz(2, false),
        "order 2 Leibniz: v1 f(v2) + g(v2)",
    ));

    // Order 3, cases 1-4 indexed by (e1, e2).
    out.push(entry("n3-1", ExtensionTensor::abelian(3), "order 3 case 1"));
    let mut n3_2 = ExtensionTensor::abelian(3);
    sym(&mut n3_2, 2, 0, 1);
    out.push(entry("n3-2", n3_2, "order 3 case 2"));
    let mut n3_3 = ExtensionTensor::abelian(3);
    sym(&mut n3_3, 1, 0, 0);
    out.push(entry("n3-3", n3_3, "order 3 case 3"));
    out.push(entry(
        "n3-4",
        ExtensionTensor::leibniz(3, false),
        "order 3 case 4 (Leibniz)",
    ));

    // Order 4, nine cases.
    out.push(entry("n4-1a", ExtensionTensor::abelian(4), "order 4 case 1a"));
    let mut n4_1b = ExtensionTensor::abelian(4);
    sym(&mut n4_1b, 3, 0, 2);
    sym(&mut n4_1b, 3, 1, 1);
    out.push(entry("n4-1b", n4_1b, "order 4 case 1b"));
    let mut n4_2 = ExtensionTensor::abelian(4);
    sym(&mut n4_2, 2, 0, 1);
    out.push(entry("n4-2", n4_2, "order 4 case 2"));
    let mut n4_3a = ExtensionTensor::abelian(4);
    sym(&mut n4_3a, 1, 0, 0);
    out.push(entry("n4-3a", n4_3a, "order 4 case 3a"));
    let mut n4_3b = ExtensionTensor::abelian(4);
    sym(&mut n4_3b, 1, 0, 0);
    sym(&mut n4_3b, 3, 2, 2);
    out.push(entry("n4-3b", n4_3b, "order 4 case 3b"));
    let mut n4_3c = ExtensionTensor::abelian(4);
    sym(&mut n4_3c, 1, 0, 0);
    sym(&mut n4_3c, 3, 0, 2);
    out.push(entry("n4-3c", n4_3c, "order 4 case 3c"));
    let mut n4_3d = ExtensionTensor::abelian(4);
    sym(&mut n4_3d, 1, 0, 0);
    sym(&mut n4_3d, 3, 0, 1);
    sym(&mut n4_3d, 3, 2, 2);
    out.push(entry("n4-3d", n4_3d, "order 4 case 3d"));
    let mut n4_4a = ExtensionTensor::abelian(4);
    sym(&mut n4_4a, 1, 0, 0);
    sym(&mut n4_4a, 2, 0, 1);
    out.push(entry("n4-4a", n4_4a, "order 4 case 4a"));
    out.push(entry(
        "n4-4b",
        ExtensionTensor::leibniz(4, false),
        "order 4 case 4b (Leibniz)",
    ));

    // Build-time sanity: every canonical tensor is a valid extension and
    // fingerprints are pairwise distinct within each order.
    for e in &out {
        assert!(e.tensor.validate().passed(), "catalog {} invalid", e.case_id);
    }
    for (i, a) in out.iter().enumerate() {
        for b in &out[i + 1..] {
            if a.tensor.dim() == b.tensor.dim() {
                assert!(
                    a.fingerprint != b.fingerprint,
                    "fingerprint collision {} vs {}",
                    a.case_id,
                    b.case_id
                );
            }
        }
    }
    out
}

/// The built-in catalog (15 entries: 2 + 4 + 9 for orders two to four).
pub fn catalog() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(build)
}
