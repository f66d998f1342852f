//! Moving frames between nodes: in-process dispatch or TCP.
//!
//! Both transports carry the same signed frames; TCP merely adds the
//! 4-byte length prefix on the socket.  One request per connection keeps
//! the server trivially correct under concurrency.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use crate::error::{Error, Result};
use crate::wire::MAX_FRAME;

/// Something that consumes a request frame and produces a response frame.
pub trait Endpoint: Send + Sync {
    fn handle_frame(&self, frame: &[u8]) -> Vec<u8>;
}

/// A client's way of reaching one node.
pub trait Transport: Send + Sync {
    fn round_trip(&self, frame: &[u8]) -> Result<Vec<u8>>;
}

/// Direct dispatch into an endpoint living in this process.
pub struct LocalTransport(pub Arc<dyn Endpoint>);

impl Transport for LocalTransport {
    fn round_trip(&self, frame: &[u8]) -> Result<Vec<u8>> {
        Ok(self.0.handle_frame(frame))
    }
}

/// Fresh TCP connection per request.
pub struct TcpTransport {
    pub addr: String,
}

impl Transport for TcpTransport {
    fn round_trip(&self, frame: &[u8]) -> Result<Vec<u8>> {
        let mut stream = TcpStream::connect(&self.addr)?;
        write_frame(&mut stream, frame)?;
        read_frame(&mut stream)
    }
}

pub fn write_frame<W: Write>(w: &mut W, frame: &[u8]) -> Result<()> {
    if frame.len() > MAX_FRAME {
        return Err(Error::Encoding("frame too large"));
    }
    w.write_all(&(frame.len() as u32).to_be_bytes())?;
    w.write_all(frame)?;
    w.flush()?;
    Ok(())
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(Error::Encoding("frame too large"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Accept loop; one thread per connection, one request per connection.
/// Runs until the process exits.
pub fn serve(listener: TcpListener, endpoint: Arc<dyn Endpoint>) -> thread::JoinHandle<()> {
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let endpoint = Arc::clone(&endpoint);
            thread::spawn(move || {
                if let Ok(frame) = read_frame(&mut stream) {
                    let response = endpoint.handle_frame(&frame);
                    let _ = write_frame(&mut stream, &response);
                }
            });
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo;

    impl Endpoint for Echo {
        fn handle_frame(&self, frame: &[u8]) -> Vec<u8> {
            let mut out = frame.to_vec();
            out.reverse();
            out
        }
    }

    #[test]
    fn local_and_tcp_agree() {
        let endpoint: Arc<dyn Endpoint> = Arc::new(Echo);
        let local = LocalTransport(Arc::clone(&endpoint));
        assert_eq!(local.round_trip(&[1, 2, 3]).unwrap(), vec![3, 2, 1]);

        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        serve(listener, endpoint);
        let tcp = TcpTransport { addr };
        assert_eq!(tcp.round_trip(&[1, 2, 3]).unwrap(), vec![3, 2, 1]);
        // a second request opens a fresh connection
        assert_eq!(tcp.round_trip(&[5]).unwrap(), vec![5]);
    }

    #[test]
    fn oversized_frames_are_refused() {
        let huge = vec![0u8; MAX_FRAME + 1];
        let mut sink = Vec::new();
        assert!(write_frame(&mut sink, &huge).is_err());
        // a hostile length prefix is not allocated
        let mut evil: &[u8] = &[0xff, 0xff, 0xff, 0xff, 0, 0];
        assert!(read_frame(&mut evil).is_err());
    }
}
