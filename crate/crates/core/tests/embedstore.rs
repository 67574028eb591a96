mod common;

use ctxrsa::embedstore::{load_dataset, read_dataset, save_dataset, write_dataset, EmbeddingDataset};
use ctxrsa::{Fingerprint, Role};
use proptest::prelude::*;

fn bits(v: &[f32]) -> Vec<u32> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #[test]
    fn round_trip_bit_exact(ds in common::dataset()) {
        let mut bytes = Vec::new();
        write_dataset(&ds, &mut bytes).unwrap();
        let back = read_dataset(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.fingerprint(), ds.fingerprint());
        prop_assert_eq!(back.dims(), ds.dims());
        prop_assert_eq!(back.len(), ds.len());
        for ((k1, v1), (k2, v2)) in ds.iter().zip(back.iter()) {
            prop_assert_eq!(k1, k2);
            prop_assert_eq!(bits(v1), bits(v2));
        }
        let mut again = Vec::new();
        write_dataset(&back, &mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn any_truncation_fails(ds in common::dataset(), cut in any::<prop::sample::Index>()) {
        let mut bytes = Vec::new();
        write_dataset(&ds, &mut bytes).unwrap();
        let at = cut.index(bytes.len());
        prop_assert!(read_dataset(&bytes[..at]).is_err());
    }
}

#[test]
fn byte_layout_matches_hand_assembly() {
    let fp = Fingerprint([0xab; 32]);
    let mut ds = EmbeddingDataset::new(fp, [(Role::Verb, 2)].into());
    ds.insert(7, Role::Verb, vec![1.0, -2.0]).unwrap();
    let mut bytes = Vec::new();
    write_dataset(&ds, &mut bytes).unwrap();

    let mut expected = Vec::new();
    expected.extend_from_slice(b"EMB1");
    expected.extend_from_slice(&[0x01, 0x00]);
    expected.extend_from_slice(&[0xab; 32]);
    expected.extend_from_slice(&[0x01, 0x00]); // one role
    expected.extend_from_slice(&[0x04, 0x00]);
    expected.extend_from_slice(b"verb");
    expected.extend_from_slice(&[0x02, 0x00, 0x00, 0x00]);
    expected.extend_from_slice(&[1, 0, 0, 0, 0, 0, 0, 0]); // one record
    expected.extend_from_slice(&[0x07, 0x00, 0x00, 0x00, 0x00, 0x00]);
    expected.extend_from_slice(&[0; 8]);
    expected.extend_from_slice(&[0x02, 0x00, 0x00, 0x00]);
    expected.extend_from_slice(&[0x00, 0x00, 0x80, 0x3f]); // 1.0
    expected.extend_from_slice(&[0x00, 0x00, 0x00, 0xc0]); // -2.0
    assert_eq!(bytes, expected);
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.emb");
    let mut ds = EmbeddingDataset::new(Fingerprint::of(b"c"), [(Role::Sentence, 3)].into());
    ds.insert(0, Role::Sentence, vec![0.5, 0.25, -0.125]).unwrap();
    save_dataset(&ds, &path).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), ds);
    assert!(load_dataset(&dir.path().join("missing")).is_err());
}
