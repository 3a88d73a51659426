use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use hypercolor_ffi::*;

fn last_error() -> String {
    let p = hc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn build_color_verify_roundtrip() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(hc_hypergraph_generate(3, 300, 10, true, 5, &mut h), HcStatus::Ok);
        assert_eq!(hc_hypergraph_k(h), 3);
        assert_eq!(hc_hypergraph_num_vertices(h), 300);
        assert!(hc_hypergraph_max_degree(h) <= 10);
        assert!(hc_hypergraph_is_simple(h));

        let mut c = ptr::null_mut();
        assert_eq!(hc_color(h, HcMode::Auto, 11, &mut c), HcStatus::Ok);
        let n = hc_coloring_len(c);
        assert_eq!(n, 300);
        assert!(hc_coloring_colors_used(c) >= 2);
        let mut colors = vec![0u32; n];
        assert_eq!(hc_coloring_copy(c, colors.as_mut_ptr(), n), HcStatus::Ok);

        let mut proper = false;
        let mut mono = usize::MAX;
        assert_eq!(hc_verify(h, colors.as_ptr(), n, &mut proper, &mut mono), HcStatus::Ok);
        assert!(proper);
        assert_eq!(mono, 0);

        let flat = vec![0u32; n];
        assert_eq!(
            hc_verify(h, flat.as_ptr(), n, &mut proper, ptr::null_mut()),
            HcStatus::Ok
        );
        assert!(!proper || hc_hypergraph_num_edges(h) == 0);

        hc_coloring_free(c);
        hc_hypergraph_free(h);
    }
}

#[test]
fn from_edges_and_error_reporting() {
    unsafe {
        let fano: [u32; 21] = [0, 1, 2, 0, 3, 4, 0, 5, 6, 1, 3, 5, 1, 4, 6, 2, 3, 6, 2, 4, 5];
        let mut h = ptr::null_mut();
        assert_eq!(hc_hypergraph_from_edges(3, 7, fano.as_ptr(), 7, &mut h), HcStatus::Ok);
        assert_eq!(hc_hypergraph_num_edges(h), 7);

        // the Fano plane is full of triangles
        let mut c = ptr::null_mut();
        assert_eq!(hc_color(h, HcMode::Direct, 0, &mut c), HcStatus::HasTriangle);
        assert!(c.is_null());
        assert!(last_error().contains("triangle"));

        assert_eq!(hc_color(h, HcMode::Full, 0, &mut c), HcStatus::Ok);
        assert!(hc_coloring_colors_used(c) >= 3);
        let mut small = [0u32; 3];
        assert_eq!(hc_coloring_copy(c, small.as_mut_ptr(), 3), HcStatus::InvalidArgument);
        hc_coloring_free(c);
        hc_hypergraph_free(h);

        let twice: [u32; 6] = [0, 1, 2, 0, 1, 3];
        let mut g = ptr::null_mut();
        assert_eq!(hc_hypergraph_from_edges(3, 4, twice.as_ptr(), 2, &mut g), HcStatus::Ok);
        assert!(!hc_hypergraph_is_simple(g));
        hc_hypergraph_free(g);

        let bad: [u32; 3] = [0, 1, 9];
        let mut g = ptr::null_mut();
        assert_eq!(
            hc_hypergraph_from_edges(3, 4, bad.as_ptr(), 1, &mut g),
            HcStatus::InvalidArgument
        );
        assert!(last_error().contains("outside"));
        assert_eq!(
            hc_hypergraph_from_edges(0, 4, ptr::null(), 0, &mut g),
            HcStatus::InvalidArgument
        );
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        assert_eq!(hc_hypergraph_k(ptr::null()), 0);
        assert!(!hc_hypergraph_is_simple(ptr::null()));
        hc_hypergraph_free(ptr::null_mut());
        hc_coloring_free(ptr::null_mut());
        let mut c = ptr::null_mut();
        assert_eq!(hc_color(ptr::null(), HcMode::Auto, 0, &mut c), HcStatus::NullPointer);
        assert_eq!(
            hc_hypergraph_from_edges(3, 3, ptr::null(), 1, ptr::null_mut()),
            HcStatus::NullPointer
        );
        assert_eq!(
            hc_hypergraph_read_file(ptr::null(), ptr::null_mut()),
            HcStatus::NullPointer
        );
    }
}

#[test]
fn read_file_errors_map_to_status() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("g.txt");
    std::fs::write(&good, "3 4 1\n0 1 2\n").unwrap();
    let bad = dir.path().join("b.txt");
    std::fs::write(&bad, "three four\n").unwrap();
    let missing = dir.path().join("none.txt");
    unsafe {
        let mut h = ptr::null_mut();
        let p = CString::new(good.to_str().unwrap()).unwrap();
        assert_eq!(hc_hypergraph_read_file(p.as_ptr(), &mut h), HcStatus::Ok);
        assert_eq!(hc_hypergraph_num_vertices(h), 4);
        hc_hypergraph_free(h);
        let p = CString::new(bad.to_str().unwrap()).unwrap();
        assert_eq!(hc_hypergraph_read_file(p.as_ptr(), &mut h), HcStatus::Parse);
        let p = CString::new(missing.to_str().unwrap()).unwrap();
        assert_eq!(hc_hypergraph_read_file(p.as_ptr(), &mut h), HcStatus::Io);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/hypercolor.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "hc_hypergraph_from_edges",
        "hc_color",
        "hc_verify",
        "hc_last_error",
        "HC_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler found; skipping compile check");
        return;
    };
    assert!(status.success(), "header does not compile");
}
