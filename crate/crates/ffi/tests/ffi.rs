use std::ffi::{c_char, CStr, CString};
use std::ptr;

use bsync_ffi::*;

const SYS: &str = include_str!("../../core/samples/fig2_sys.bsp");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    bsync_string_free(s);
    out
}

unsafe fn last_error() -> String {
    CStr::from_ptr(bsync_last_error()).to_string_lossy().into_owned()
}

unsafe fn process(text: &str) -> *mut BsyncProcess {
    let mut p = ptr::null_mut();
    assert_eq!(bsync_process_parse(c(text).as_ptr(), &mut p), BsyncStatus::Ok);
    p
}

unsafe fn graph(p: *const BsyncProcess) -> *mut BsyncGraph {
    let mut g = ptr::null_mut();
    assert_eq!(bsync_graph_from_process(p, &mut g), BsyncStatus::Ok);
    g
}

#[test]
fn counts_sys() {
    unsafe {
        let p = process(SYS);
        let g = graph(p);
        let mut out = ptr::null_mut();
        assert_eq!(bsync_count(g, &mut out), BsyncStatus::Ok);
        assert_eq!(take(out), "1975974");
        let mut fj = false;
        assert_eq!(bsync_is_fork_join(p, &mut fj), BsyncStatus::Ok);
        assert!(!fj);
        assert_eq!(bsync_count_fork_join(p, &mut out), BsyncStatus::Inapplicable);
        assert!(!last_error().is_empty());
        let mut bit = false;
        assert_eq!(bsync_is_bit_decomposable(g, &mut bit), BsyncStatus::Ok);
        assert!(bit);
        bsync_graph_free(g);
        bsync_process_free(p);
    }
}

#[test]
fn fork_join_count_agrees() {
    unsafe {
        let p = process("nu(B) (a.<B>0 || b.<B>0 || <B>c.0)");
        let mut size = 0;
        assert_eq!(bsync_process_size(p, &mut size), BsyncStatus::Ok);
        assert_eq!(size, 3);
        let g = graph(p);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(bsync_count_fork_join(p, &mut a), BsyncStatus::Ok);
        assert_eq!(bsync_count(g, &mut b), BsyncStatus::Ok);
        assert_eq!(take(a), "2");
        assert_eq!(take(b), "2");
        bsync_graph_free(g);
        bsync_process_free(p);
    }
}

#[test]
fn deadlock_is_reported() {
    unsafe {
        let p = process("nu(B) nu(C) [<B><C>a.0 || <C><B>b.0]");
        let g = graph(p);
        let mut dead = false;
        assert_eq!(bsync_graph_has_deadlock(g, &mut dead), BsyncStatus::Ok);
        assert!(dead);
        let mut out = ptr::null_mut();
        assert_eq!(bsync_count(g, &mut out), BsyncStatus::Deadlock);
        assert!(out.is_null());
        let mut s = ptr::null_mut();
        assert_eq!(bsync_sampler_new(g, 1, &mut s), BsyncStatus::Deadlock);
        bsync_graph_free(g);
        bsync_process_free(p);
    }
}

#[test]
fn bad_input_is_rejected() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(bsync_process_parse(c("a.(b.0").as_ptr(), &mut p), BsyncStatus::Parse);
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(bsync_process_parse(c("<B>a.0").as_ptr(), &mut p), BsyncStatus::Parse);
        assert_eq!(bsync_process_parse(ptr::null(), &mut p), BsyncStatus::NullPointer);
        let bytes = [0xffu8, 0];
        assert_eq!(bsync_process_parse(bytes.as_ptr().cast(), &mut p), BsyncStatus::InvalidUtf8);
        let mut n = 0;
        assert_eq!(bsync_graph_num_vertices(ptr::null(), &mut n), BsyncStatus::NullPointer);
        let mut g = ptr::null_mut();
        assert_eq!(bsync_graph_parse_edges(c("a -> b\nb -> a").as_ptr(), &mut g), BsyncStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(bsync_count(g, &mut out), BsyncStatus::Deadlock);
        bsync_graph_free(g);
        bsync_process_free(ptr::null_mut());
        bsync_graph_free(ptr::null_mut());
        bsync_sampler_free(ptr::null_mut());
        bsync_string_free(ptr::null_mut());
    }
}

#[test]
fn sampler_is_seeded() {
    unsafe {
        let mut g = ptr::null_mut();
        let edges = c("a -> c\nb -> c\nc -> d\nb -> e");
        assert_eq!(bsync_graph_parse_edges(edges.as_ptr(), &mut g), BsyncStatus::Ok);
        let mut n = 0;
        assert_eq!(bsync_graph_num_vertices(g, &mut n), BsyncStatus::Ok);
        assert_eq!(n, 5);
        let draw = |seed| {
            let mut s = ptr::null_mut();
            assert_eq!(bsync_sampler_new(g, seed, &mut s), BsyncStatus::Ok);
            let runs: Vec<String> = (0..20)
                .map(|_| {
                    let mut out = ptr::null_mut();
                    assert_eq!(bsync_sampler_next(s, &mut out), BsyncStatus::Ok);
                    take(out)
                })
                .collect();
            bsync_sampler_free(s);
            runs
        };
        let first = draw(9);
        assert_eq!(first, draw(9));
        for run in &first {
            let order: Vec<&str> = run.split(' ').collect();
            let pos = |x| order.iter().position(|v| *v == x).unwrap();
            assert_eq!(order.len(), 5);
            assert!(pos("a") < pos("c") && pos("b") < pos("c") && pos("c") < pos("d") && pos("b") < pos("e"));
        }
        bsync_graph_free(g);
    }
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(bsync_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let header = include_str!("../include/bsync.h");
    for name in ["BSYNC_H", "BSYNC_STATUS_DEADLOCK", "bsync_sampler_next", "typedef struct BsyncGraph BsyncGraph"] {
        assert!(header.contains(name), "{name}");
    }
}
