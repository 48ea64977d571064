//! On-disk prime tables.
//!
//! Layout, all little-endian: the 8 magic bytes `PTABLE01`, then `lo`, `hi`
//! and `count` as u64, then `count` primes as u64.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ArithError, PrimeTable};

pub const PRIME_TABLE_MAGIC: &[u8; 8] = b"PTABLE01";

pub fn write_prime_table(path: &Path, table: &PrimeTable) -> Result<(), ArithError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(PRIME_TABLE_MAGIC)?;
    for v in [table.range_lo, table.range_hi, table.primes.len() as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    for &p in &table.primes {
        w.write_all(&p.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64, ArithError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_prime_table(path: &Path) -> Result<PrimeTable, ArithError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != PRIME_TABLE_MAGIC {
        return Err(ArithError::BadCacheFile("wrong magic".into()));
    }
    let range_lo = read_u64(&mut r)?;
    let range_hi = read_u64(&mut r)?;
    let count = read_u64(&mut r)?;
    if range_lo > range_hi || count > range_hi - range_lo + 1 {
        return Err(ArithError::BadCacheFile("inconsistent header".into()));
    }
    let mut primes = Vec::with_capacity(count as usize);
    for _ in 0..count {
        primes.push(read_u64(&mut r)?);
    }
    if primes.windows(2).any(|w| w[0] >= w[1])
        || primes.first().is_some_and(|&p| p < range_lo)
        || primes.last().is_some_and(|&p| p > range_hi)
    {
        return Err(ArithError::BadCacheFile("primes out of order or range".into()));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(ArithError::BadCacheFile("trailing bytes".into()));
    }
    Ok(PrimeTable {
        range_lo,
        range_hi,
        primes,
    })
}

/// One prime per line under a `prime` header.
pub fn write_prime_table_csv(path: &Path, table: &PrimeTable) -> Result<(), ArithError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "prime")?;
    for p in &table.primes {
        writeln!(w, "{p}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_primes;

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        let table = sieve_primes(1000, 5000).unwrap();
        write_prime_table(&path, &table).unwrap();
        assert_eq!(read_prime_table(&path).unwrap(), table);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], PRIME_TABLE_MAGIC);
        assert_eq!(bytes.len(), 32 + 8 * table.len());
    }

    #[test]
    fn corrupt_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"NOTATABLE_______").unwrap();
        assert!(matches!(
            read_prime_table(&path),
            Err(ArithError::BadCacheFile(_))
        ));
    }

    #[test]
    fn csv_export() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_prime_table_csv(&path, &sieve_primes(2, 10).unwrap()).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "prime\n2\n3\n5\n7\n");
    }
}
