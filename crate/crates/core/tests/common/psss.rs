//! Second transcription of the (1,1,1) J and K numerators, written as plain
//! floating-point arithmetic over the derivative values of p.

/// Derivative values of p, looked up by name: "p", "p1", "px11", ...
pub trait Jet {
    fn d(&self, name: &str) -> f64;
}

pub fn j_numerator(v: &impl Jet) -> f64 {
    let p = v.d("p");
    let p1 = v.d("p1");
    let p11 = v.d("p11");
    let p111 = v.d("p111");
    let p1111 = v.d("p1111");
    let px1 = v.d("px1");
    let px11 = v.d("px11");
    let px111 = v.d("px111");
    let px1111 = v.d("px1111");
    let py1 = v.d("py1");
    let py11 = v.d("py11");
    let py111 = v.d("py111");
    let py1111 = v.d("py1111");
    // Total x-derivative of p1 along a solution.
    let dp1 = px1 + p * py1;

    let mut s = 0.0;
    s += -15.0 * p11.powi(3) * px1 + 10.0 * p1 * p11 * p111 * px1;
    s += 15.0 * p1 * p11 * p11 * px11 - 4.0 * p1 * p1 * p111 * px11;
    s += 12.0 * p1 * p1 * p11 * p11 * py1 - 15.0 * p * p11.powi(3) * py1;
    s += -4.0 * p1.powi(3) * p111 * py1 + 10.0 * p * p1 * p11 * p111 * py1;
    s += -12.0 * p1.powi(3) * p11 * py11 + 15.0 * p * p1 * p11 * p11 * py11;
    s += -4.0 * p * p1 * p1 * p111 * py11 - 6.0 * p1 * p1 * p11 * px111;
    s += 4.0 * p1 * p1 * (p1 * p1 - 1.5 * p * p11) * py111;
    s += -p1 * p1 * dp1 * p1111;
    s += p1.powi(3) * (px1111 + p * py1111);
    s
}

pub fn k_numerator(v: &impl Jet) -> f64 {
    let g = |n: &str| v.d(n);
    let (p, p1, p11) = (g("p"), g("p1"), g("p11"));
    let (px, px1, px11) = (g("px"), g("px1"), g("px11"));
    let (py, py1, py11) = (g("py"), g("py1"), g("py11"));
    let (pxx, pxx1, pxx11) = (g("pxx"), g("pxx1"), g("pxx11"));
    let (pxy, pxy1, pxy11) = (g("pxy"), g("pxy1"), g("pxy11"));
    let (pyy, pyy1, pyy11) = (g("pyy"), g("pyy1"), g("pyy11"));
    let (pxxx1, pxxx11) = (g("pxxx1"), g("pxxx11"));
    let (pxxy1, pxxy11) = (g("pxxy1"), g("pxxy11"));
    let (pxyy, pxyy1, pxyy11) = (g("pxyy"), g("pxyy1"), g("pxyy11"));
    let (pyyy, pyyy1, pyyy11) = (g("pyyy"), g("pyyy1"), g("pyyy11"));
    let q2 = p1 * p1;
    let q3 = q2 * p1;
    let q4 = q3 * p1;
    let q5 = q4 * p1;
    let pp = p * p;
    let ppp = pp * p;

    // One line of the printed formula per statement.
    let rows = [
        -15.0 * p11 * px1.powi(3) + 15.0 * p1 * px1 * px1 * px11 + 10.0 * p1 * p11 * px1 * pxx1
            - 4.0 * q2 * px11 * pxx1,
        -6.0 * q2 * px1 * pxx11 - q2 * p11 * pxxx1 + q3 * pxxx11 - 2.0 * q4 * pxxy1
            - 3.0 * p * q2 * p11 * pxxy1,
        3.0 * p * q3 * pxxy11 - q2 * p11 * px1 * pxy + q3 * px11 * pxy - 3.0 * q2 * p11 * px * pxy1
            + 6.0 * q3 * px1 * pxy1,
        20.0 * p * p1 * p11 * px1 * pxy1 - 8.0 * p * q2 * px11 * pxy1 + 3.0 * q3 * px * pxy11
            - 12.0 * p * q2 * px1 * pxy11
            + 2.0 * q5 * pxyy,
        -4.0 * p * q4 * pxyy1 - 3.0 * pp * q2 * p11 * pxyy1 + 3.0 * pp * q3 * pxyy11
            + 10.0 * p1 * p11 * px1 * px1 * py
            - 10.0 * q2 * px1 * px11 * py,
        -3.0 * q2 * p11 * pxx1 * py + 3.0 * q3 * pxx11 * py - 6.0 * q4 * pxy1 * py
            - 9.0 * p * q2 * p11 * pxy1 * py
            + 9.0 * p * q3 * pxy11 * py,
        -2.0 * q2 * p11 * px1 * py * py + 2.0 * q3 * px11 * py * py + 10.0 * p1 * p11 * px * px1 * py1
            - 6.0 * q2 * px1 * px1 * py1
            - 45.0 * p * p11 * px1 * px1 * py1,
        -4.0 * q2 * px * px11 * py1 + 30.0 * p * p1 * px1 * px11 * py1 - q2 * p11 * pxx * py1
            + 2.0 * q3 * pxx1 * py1,
        10.0 * p * p1 * p11 * pxx1 * py1 - 6.0 * p * q2 * pxx11 * py1 - 2.0 * q4 * pxy * py1
            - 3.0 * p * q2 * p11 * pxy * py1,
        10.0 * p * q3 * pxy1 * py1 + 20.0 * pp * p1 * p11 * pxy1 * py1 - 12.0 * pp * q2 * pxy11 * py1
            - 4.0 * q2 * p11 * px * py * py1,
        8.0 * q3 * px1 * py * py1 + 30.0 * p * p1 * p11 * px1 * py * py1 - 14.0 * p * q2 * px11 * py * py1
            - 4.0 * q4 * py * py * py1,
        -6.0 * p * q2 * p11 * py * py * py1 + 2.0 * q3 * px * py1 * py1 + 10.0 * p * p1 * p11 * px * py1 * py1
            - 12.0 * p * q2 * px1 * py1 * py1,
        -45.0 * pp * p11 * px1 * py1 * py1 + 15.0 * pp * p1 * px11 * py1 * py1
            + 10.0 * p * q3 * py * py1 * py1
            + 20.0 * pp * p1 * p11 * py * py1 * py1
            - 6.0 * pp * q2 * py1.powi(3),
        -15.0 * ppp * p11 * py1.powi(3) - 6.0 * q2 * px * px1 * py11 + 15.0 * p * p1 * px1 * px1 * py11
            + q3 * pxx * py11
            - 4.0 * p * q2 * pxx1 * py11,
        3.0 * p * q3 * pxy * py11 - 8.0 * pp * q2 * pxy1 * py11 + 4.0 * q3 * px * py * py11
            - 16.0 * p * q2 * px1 * py * py11
            + 6.0 * p * q3 * py * py * py11,
        -10.0 * p * q2 * px * py1 * py11 + 30.0 * pp * p1 * px1 * py1 * py11
            - 20.0 * pp * q2 * py * py1 * py11
            + 15.0 * ppp * p1 * py1 * py1 * py11,
        -2.0 * q4 * px1 * pyy - p * q2 * p11 * px1 * pyy + p * q3 * px11 * pyy + 4.0 * q5 * py * pyy
            - 4.0 * p * q4 * py1 * pyy,
        -2.0 * pp * q2 * p11 * py1 * pyy + 2.0 * pp * q3 * py11 * pyy - 2.0 * q4 * px * pyy1
            - 3.0 * p * q2 * p11 * px * pyy1
            + 6.0 * p * q3 * px1 * pyy1,
        10.0 * pp * p1 * p11 * px1 * pyy1 - 4.0 * pp * q2 * px11 * pyy1 - 8.0 * p * q4 * py * pyy1
            - 6.0 * pp * q2 * p11 * py * pyy1,
        8.0 * pp * q3 * py1 * pyy1 + 10.0 * ppp * p1 * p11 * py1 * pyy1 - 4.0 * ppp * q2 * py11 * pyy1
            + 3.0 * p * q3 * px * pyy11,
        -6.0 * pp * q2 * px1 * pyy11 + 6.0 * pp * q3 * py * pyy11 - 6.0 * ppp * q2 * py1 * pyy11
            + 2.0 * p * q5 * pyyy
            - 2.0 * pp * q4 * pyyy1,
        -ppp * q2 * p11 * pyyy1 + ppp * q3 * pyyy11,
    ];
    rows.iter().sum()
}
