//! Bit-exact codec for the MLOB wire format.
//!
//! File layout: magic `MLB1`, version `u16` BE, then frames. Each frame is a
//! `u16` BE length prefix followed by that many body bytes. All integers are
//! big-endian. Body layouts by kind code:
//!
//! ```text
//! R: 'R' locate:u16 symbol:[u8;8]                                   (11 bytes)
//! T: 'T' locate:u16 ts:u64                                          (11)
//! A: 'A' locate:u16 ts:u64 order_id:u64 side:u8 shares:u32 price:u32 (28)
//! E: 'E' locate:u16 ts:u64 order_id:u64 shares:u32 match_id:u64     (31)
//! X: 'X' locate:u16 ts:u64 order_id:u64 shares:u32                  (23)
//! D: 'D' locate:u16 ts:u64 order_id:u64                             (19)
//! C: 'C' locate:u16 ts:u64 shares:u32 price:u32                     (19)
//! P: 'P' locate:u16 ts:u64 side:u8 shares:u32 price:u32 match_id:u64 (28)
//! ```
//!
//! `side` is `'B'` or `'S'`. Shares and prices must be nonzero where present;
//! symbols are ASCII, right-padded with spaces.

use super::{Side, TapeError, TapeMessage};

pub const MAGIC: [u8; 4] = *b"MLB1";
pub const VERSION: u16 = 1;

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    kind: char,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], TapeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(TapeError::FieldRange {
                kind: self.kind,
                field,
            }),
        }
    }

    fn u16(&mut self, field: &'static str) -> Result<u16, TapeError> {
        Ok(u16::from_be_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn u32(&mut self, field: &'static str) -> Result<u32, TapeError> {
        Ok(u32::from_be_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn u64(&mut self, field: &'static str) -> Result<u64, TapeError> {
        Ok(u64::from_be_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    fn side(&mut self) -> Result<Side, TapeError> {
        match self.take(1, "side")?[0] {
            b'B' => Ok(Side::Bid),
            b'S' => Ok(Side::Ask),
            _ => Err(TapeError::FieldRange {
                kind: self.kind,
                field: "side",
            }),
        }
    }

    fn nonzero_u32(&mut self, field: &'static str) -> Result<u32, TapeError> {
        let v = self.u32(field)?;
        if v == 0 {
            return Err(TapeError::FieldRange {
                kind: self.kind,
                field,
            });
        }
        Ok(v)
    }

    fn done(&self) -> Result<(), TapeError> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(TapeError::FieldRange {
                kind: self.kind,
                field: "trailing bytes",
            })
        }
    }
}

/// Decodes one length-prefixed frame. Returns the message and the number of
/// bytes consumed (`2 + body length`). Never panics on arbitrary input.
pub fn decode_message(frame: &[u8]) -> Result<(TapeMessage, usize), TapeError> {
    if frame.len() < 2 {
        return Err(TapeError::TruncatedFrame {
            declared: 2,
            available: frame.len(),
        });
    }
    let len = u16::from_be_bytes([frame[0], frame[1]]) as usize;
    if frame.len() < 2 + len {
        return Err(TapeError::TruncatedFrame {
            declared: len,
            available: frame.len() - 2,
        });
    }
    let body = &frame[2..2 + len];
    if body.is_empty() {
        return Err(TapeError::TruncatedFrame {
            declared: len,
            available: 0,
        });
    }
    let code = body[0];
    let mut c = Cursor {
        buf: body,
        pos: 1,
        kind: code as char,
    };
    let msg = match code {
        b'R' => {
            let locate = c.u16("locate")?;
            let sym: [u8; 8] = c.take(8, "symbol")?.try_into().unwrap();
            if !sym.iter().all(|b| b.is_ascii_graphic() || *b == b' ') {
                return Err(TapeError::FieldRange {
                    kind: 'R',
                    field: "symbol",
                });
            }
            TapeMessage::Directory {
                locate,
                symbol: sym,
            }
        }
        b'T' => TapeMessage::Timestamp {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
        },
        b'A' => TapeMessage::Add {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
            order_id: c.u64("order_id")?,
            side: c.side()?,
            shares: c.nonzero_u32("shares")?,
            price: c.nonzero_u32("price")?,
        },
        b'E' => TapeMessage::Execute {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
            order_id: c.u64("order_id")?,
            shares: c.nonzero_u32("shares")?,
            match_id: c.u64("match_id")?,
        },
        b'X' => TapeMessage::Cancel {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
            order_id: c.u64("order_id")?,
            shares: c.nonzero_u32("shares")?,
        },
        b'D' => TapeMessage::Delete {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
            order_id: c.u64("order_id")?,
        },
        b'C' => TapeMessage::SpecialDeal {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
            shares: c.nonzero_u32("shares")?,
            price: c.nonzero_u32("price")?,
        },
        b'P' => TapeMessage::HiddenExec {
            locate: c.u16("locate")?,
            timestamp_ns: c.u64("timestamp_ns")?,
            side: c.side()?,
            shares: c.nonzero_u32("shares")?,
            price: c.nonzero_u32("price")?,
            match_id: c.u64("match_id")?,
        },
        other => return Err(TapeError::UnknownKind(other)),
    };
    c.done()?;
    Ok((msg, 2 + len))
}

fn put_side(out: &mut Vec<u8>, side: Side) {
    out.push(match side {
        Side::Bid => b'B',
        Side::Ask => b'S',
    });
}

fn check_nonzero(v: u32, kind: char, field: &'static str) -> Result<(), TapeError> {
    if v == 0 {
        Err(TapeError::FieldRange { kind, field })
    } else {
        Ok(())
    }
}

/// Encodes a message as one length-prefixed frame. The round trip
/// `decode(encode(m)) == m` is bit-exact for every valid message.
pub fn encode_message(msg: &TapeMessage) -> Result<Vec<u8>, TapeError> {
    let mut body = Vec::with_capacity(32);
    match *msg {
        TapeMessage::Directory { locate, symbol } => {
            if !symbol.iter().all(|b| b.is_ascii_graphic() || *b == b' ') {
                return Err(TapeError::FieldRange {
                    kind: 'R',
                    field: "symbol",
                });
            }
            body.push(b'R');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&symbol);
        }
        TapeMessage::Timestamp {
            locate,
            timestamp_ns,
        } => {
            body.push(b'T');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
        }
        TapeMessage::Add {
            locate,
            timestamp_ns,
            order_id,
            side,
            shares,
            price,
        } => {
            check_nonzero(shares, 'A', "shares")?;
            check_nonzero(price, 'A', "price")?;
            body.push(b'A');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
            body.extend_from_slice(&order_id.to_be_bytes());
            put_side(&mut body, side);
            body.extend_from_slice(&shares.to_be_bytes());
            body.extend_from_slice(&price.to_be_bytes());
        }
        TapeMessage::Execute {
            locate,
            timestamp_ns,
            order_id,
            shares,
            match_id,
        } => {
            check_nonzero(shares, 'E', "shares")?;
            body.push(b'E');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
            body.extend_from_slice(&order_id.to_be_bytes());
            body.extend_from_slice(&shares.to_be_bytes());
            body.extend_from_slice(&match_id.to_be_bytes());
        }
        TapeMessage::Cancel {
            locate,
            timestamp_ns,
            order_id,
            shares,
        } => {
            check_nonzero(shares, 'X', "shares")?;
            body.push(b'X');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
            body.extend_from_slice(&order_id.to_be_bytes());
            body.extend_from_slice(&shares.to_be_bytes());
        }
        TapeMessage::Delete {
            locate,
            timestamp_ns,
            order_id,
        } => {
            body.push(b'D');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
            body.extend_from_slice(&order_id.to_be_bytes());
        }
        TapeMessage::SpecialDeal {
            locate,
            timestamp_ns,
            shares,
            price,
        } => {
            check_nonzero(shares, 'C', "shares")?;
            check_nonzero(price, 'C', "price")?;
            body.push(b'C');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
            body.extend_from_slice(&shares.to_be_bytes());
            body.extend_from_slice(&price.to_be_bytes());
        }
        TapeMessage::HiddenExec {
            locate,
            timestamp_ns,
            side,
            shares,
            price,
            match_id,
        } => {
            check_nonzero(shares, 'P', "shares")?;
            check_nonzero(price, 'P', "price")?;
            body.push(b'P');
            body.extend_from_slice(&locate.to_be_bytes());
            body.extend_from_slice(&timestamp_ns.to_be_bytes());
            put_side(&mut body, side);
            body.extend_from_slice(&shares.to_be_bytes());
            body.extend_from_slice(&price.to_be_bytes());
            body.extend_from_slice(&match_id.to_be_bytes());
        }
    }
    debug_assert!(body.len() <= u16::MAX as usize);
    let mut frame = Vec::with_capacity(2 + body.len());
    frame.extend_from_slice(&(body.len() as u16).to_be_bytes());
    frame.extend_from_slice(&body);
    Ok(frame)
}

/// Decodes a whole tape (magic + version + frames). Timestamps must be
/// non-decreasing across the file.
pub fn read_tape_bytes(bytes: &[u8]) -> Result<Vec<TapeMessage>, TapeError> {
    if bytes.len() < 6 || bytes[..4] != MAGIC {
        return Err(TapeError::BadMagic);
    }
    let version = u16::from_be_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(TapeError::BadVersion(version));
    }
    let mut msgs = Vec::new();
    let mut pos = 6;
    let mut last_ts = 0u64;
    while pos < bytes.len() {
        let (msg, used) = decode_message(&bytes[pos..])?;
        if let Some(ts) = msg.timestamp_ns() {
            if ts < last_ts {
                return Err(TapeError::TimestampRegression {
                    previous: last_ts,
                    current: ts,
                });
            }
            last_ts = ts;
        }
        msgs.push(msg);
        pos += used;
    }
    Ok(msgs)
}

/// Encodes a tape file image (magic + version + frames).
pub fn write_tape_bytes(msgs: &[TapeMessage]) -> Result<Vec<u8>, TapeError> {
    let mut out = Vec::with_capacity(6 + msgs.len() * 32);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_be_bytes());
    for m in msgs {
        out.extend_from_slice(&encode_message(m)?);
    }
    Ok(out)
}
