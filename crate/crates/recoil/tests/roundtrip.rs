//! End-to-end checks through the public API only: bytes in, container bytes
//! out, bytes back, plus the error surface a user of the crate can hit.

use recoil::{
    bytes_from_symbols, combine_container, datasets, decode_container, encode_to_container,
    read_container, symbols_from_bytes, Error,
};

#[test]
fn bytes_to_container_file_and_back() {
    let data = datasets::exponential_bytes(11, 300_000, 100);
    let symbols = symbols_from_bytes(&data);
    let c = encode_to_container(&symbols, 8, 11, 32, 16).unwrap();
    let (file, sizes) = c.to_bytes().unwrap();
    assert_eq!(sizes.total(), file.len() as u64);
    assert!(
        (file.len() as f64) < 0.5 * data.len() as f64,
        "this distribution compresses well below half"
    );

    let back = read_container(&file).unwrap();
    for workers in [1, 4] {
        let symbols_out = decode_container(&back, workers).unwrap();
        assert_eq!(bytes_from_symbols(&symbols_out).unwrap(), data);
    }
}

#[test]
fn sixteen_bit_symbols_roundtrip() {
    let mut symbols: Vec<u16> = Vec::new();
    let noise = datasets::exponential_bytes(5, 50_000, 200);
    for (i, &b) in noise.iter().enumerate() {
        symbols.push(b as u16 + if i % 7 == 0 { 40_000 } else { 0 });
    }
    let c = encode_to_container(&symbols, 16, 12, 8, 8).unwrap();
    let (file, _) = c.to_bytes().unwrap();
    assert_eq!(decode_container(&read_container(&file).unwrap(), 3).unwrap(), symbols);
}

#[test]
fn combine_preserves_decoded_output() {
    let data = datasets::ascii_text(3, 200_000);
    let symbols = symbols_from_bytes(&data);
    let c = encode_to_container(&symbols, 8, 11, 32, 64).unwrap();
    let full = decode_container(&c, 4).unwrap();
    for target in [1u64, 2, 7, 16] {
        let thin = combine_container(&c, target).unwrap();
        assert!(thin.tasks() <= target.max(1));
        assert_eq!(decode_container(&thin, 4).unwrap(), full);
        // The stream is untouched; only metadata shrank.
        assert_eq!(thin.words, c.words);
        let (bytes, _) = thin.to_bytes().unwrap();
        assert_eq!(decode_container(&read_container(&bytes).unwrap(), 2).unwrap(), full);
    }
}

#[test]
fn conventional_and_split_agree_on_content() {
    let data = datasets::exponential_bytes(8, 150_000, 50);
    let symbols = symbols_from_bytes(&data);

    let split = encode_to_container(&symbols, 8, 11, 32, 16).unwrap();
    let conv = recoil::encode_conventional(&symbols, 8, 11, 32, 16).unwrap();
    let a = decode_container(&split, 4).unwrap();
    let b = recoil::decode_conventional(&conv, 4).unwrap();
    assert_eq!(a, symbols);
    assert_eq!(b, symbols);

    let (cb, _) = conv.to_bytes().unwrap();
    let back = recoil::read_conventional(&cb).unwrap();
    assert_eq!(recoil::decode_conventional(&back, 1).unwrap(), symbols);
}

#[test]
fn error_classes_map_to_distinct_exit_codes() {
    // Parameter and model failures.
    let too_many: Vec<u16> = (0..256).collect();
    let e = encode_to_container(&too_many, 8, 4, 4, 1).unwrap_err();
    assert!(matches!(e, Error::AlphabetTooLarge { .. }));
    assert_eq!(e.exit_code(), 2);
    assert_eq!(
        encode_to_container(&[1], 8, 11, 0, 1).unwrap_err().exit_code(),
        2
    );

    // Format failures.
    let c = encode_to_container(&[1, 2, 3, 1], 8, 4, 2, 1).unwrap();
    let (bytes, _) = c.to_bytes().unwrap();
    let mut bad = bytes.clone();
    bad[1] = b'X';
    let e = read_container(&bad).unwrap_err();
    assert!(matches!(e, Error::BadMagic));
    assert_eq!(e.exit_code(), 3);
    let e = read_container(&bytes[..10]).unwrap_err();
    assert!(matches!(e, Error::TruncatedContainer(_)));
    assert_eq!(e.exit_code(), 3);

    // Decode failures.
    let data = datasets::exponential_bytes(2, 40_000, 100);
    let symbols = symbols_from_bytes(&data);
    let mut c = encode_to_container(&symbols, 8, 11, 4, 1).unwrap();
    c.words.truncate(c.words.len() / 2);
    let e = decode_container(&c, 2).unwrap_err();
    assert!(matches!(e, Error::BitstreamUnderflow));
    assert_eq!(e.exit_code(), 4);
}

#[test]
fn adversarial_shapes_roundtrip() {
    for (name, symbols) in [
        ("empty", Vec::<u16>::new()),
        ("one", vec![7u16]),
        ("thirty one", (0..31u16).map(|i| i % 3).collect()),
        ("thirty two", (0..32u16).map(|i| i % 3).collect()),
        ("thirty three", (0..33u16).map(|i| i % 3).collect()),
        ("flat", vec![0u16; 10_000]),
        ("alternating", (0..10_000u16).map(|i| i % 2).collect()),
    ] {
        for lanes in [1u16, 32] {
            let c = encode_to_container(&symbols, 8, 11, lanes, 16).unwrap();
            let (bytes, _) = c.to_bytes().unwrap();
            let out = decode_container(&read_container(&bytes).unwrap(), 8).unwrap();
            assert_eq!(out, symbols, "{name} lanes={lanes}");
        }
    }
}
