//! Hand-built `DMAT` images with known defects.

use dalr::Error;

/// Header bytes for the given fields.
pub fn header(magic: &[u8; 4], version: u32, dtype: u32, rows: u64, cols: u64) -> Vec<u8> {
    let mut h = Vec::with_capacity(28);
    h.extend_from_slice(magic);
    h.extend_from_slice(&version.to_le_bytes());
    h.extend_from_slice(&dtype.to_le_bytes());
    h.extend_from_slice(&rows.to_le_bytes());
    h.extend_from_slice(&cols.to_le_bytes());
    h
}

fn f64_payload(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub struct Fixture {
    pub name: &'static str,
    pub bytes: Vec<u8>,
    pub expect: fn(&Error) -> bool,
}

pub fn corrupt_fixtures() -> Vec<Fixture> {
    let good = |rows: u64, cols: u64| {
        let mut b = header(b"DMAT", 1, 1, rows, cols);
        b.extend(f64_payload(&vec![1.0; (rows * cols) as usize]));
        b
    };
    let mut nan_payload = header(b"DMAT", 1, 1, 2, 2);
    nan_payload.extend(f64_payload(&[1.0, 2.0, f64::NAN, 4.0]));
    let mut inf32 = header(b"DMAT", 1, 0, 1, 3);
    for v in [1.0f32, 2.0, f32::INFINITY] {
        inf32.extend_from_slice(&v.to_le_bytes());
    }
    let mut trailing = good(2, 2);
    trailing.push(0);
    let mut short_payload = good(3, 3);
    short_payload.truncate(28 + 8 * 9 - 3);

    vec![
        Fixture {
            name: "magic XMAT",
            bytes: {
                let mut b = good(3, 3);
                b[0] = b'X';
                b
            },
            expect: |e| matches!(e, Error::BadMagic { found } if found == b"XMAT"),
        },
        Fixture {
            name: "lowercase magic",
            bytes: {
                let mut b = good(1, 1);
                b[..4].copy_from_slice(b"dmat");
                b
            },
            expect: |e| matches!(e, Error::BadMagic { .. }),
        },
        Fixture {
            name: "version 2",
            bytes: {
                let mut b = good(2, 2);
                b[4] = 2;
                b
            },
            expect: |e| matches!(e, Error::BadVersion { found: 2 }),
        },
        Fixture {
            name: "version 0",
            bytes: {
                let mut b = good(2, 2);
                b[4] = 0;
                b
            },
            expect: |e| matches!(e, Error::BadVersion { found: 0 }),
        },
        Fixture {
            name: "dtype 7",
            bytes: {
                let mut b = good(2, 2);
                b[8] = 7;
                b
            },
            expect: |e| matches!(e, Error::BadDtype { found: 7 }),
        },
        Fixture {
            name: "empty file",
            bytes: Vec::new(),
            expect: |e| {
                matches!(
                    e,
                    Error::Truncated {
                        offset: 0,
                        expected: 28
                    }
                )
            },
        },
        Fixture {
            name: "header cut at 20 bytes",
            bytes: good(2, 2)[..20].to_vec(),
            expect: |e| {
                matches!(
                    e,
                    Error::Truncated {
                        offset: 20,
                        expected: 28
                    }
                )
            },
        },
        Fixture {
            name: "payload short by 3 bytes",
            bytes: short_payload,
            expect: |e| {
                matches!(
                    e,
                    Error::Truncated {
                        offset: 97,
                        expected: 100
                    }
                )
            },
        },
        Fixture {
            name: "f32 dtype over f64 payload",
            bytes: {
                let mut b = good(2, 2);
                b[8] = 0;
                b
            },
            expect: |e| matches!(e, Error::TrailingData { offset: 44 }),
        },
        Fixture {
            name: "one trailing byte",
            bytes: trailing,
            expect: |e| matches!(e, Error::TrailingData { offset: 60 }),
        },
        Fixture {
            name: "huge dimensions",
            bytes: header(b"DMAT", 1, 1, u64::MAX, 2),
            expect: |e| matches!(e, Error::Truncated { .. }),
        },
        Fixture {
            name: "NaN in f64 payload",
            bytes: nan_payload,
            expect: |e| {
                matches!(
                    e,
                    Error::NonFiniteValue {
                        offset: 44,
                        row: 1,
                        col: 0
                    }
                )
            },
        },
        Fixture {
            name: "infinity in f32 payload",
            bytes: inf32,
            expect: |e| {
                matches!(
                    e,
                    Error::NonFiniteValue {
                        offset: 36,
                        row: 0,
                        col: 2
                    }
                )
            },
        },
    ]
}
