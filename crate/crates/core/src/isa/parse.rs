use std::collections::HashMap;

use super::instr::{
    Addressing, InstrKind, Opcode, OperandForm, ScalarOperand, ScalarReg, VInstr, VlSpec,
};
use super::types::Ew;
use crate::error::{Error, Result};

/// Values held by scalar registers while a trace is parsed.
#[derive(Clone, Debug, Default)]
pub struct ScalarFile {
    regs: HashMap<ScalarReg, u64>,
}

impl ScalarFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, reg: ScalarReg) -> u64 {
        if reg.is_zero() {
            return 0;
        }
        self.regs.get(&reg).copied().unwrap_or(0)
    }

    pub fn set(&mut self, reg: ScalarReg, value: u64) {
        if !reg.is_zero() {
            self.regs.insert(reg, value);
        }
    }
}

/// A parsed trace: instructions in program order.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    pub instrs: Vec<VInstr>,
}

impl Trace {
    /// Parses a whole trace, honouring `@scalar` directives.
    pub fn parse(text: &str) -> Result<Trace> {
        let mut scalars = ScalarFile::new();
        let mut instrs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix("@scalar") {
                let (reg, value) = parse_directive(line, rest)?;
                scalars.set(reg, value);
                continue;
            }
            instrs.push(parse_line(line, body, &scalars)?);
        }
        Ok(Trace { instrs })
    }
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(i) => &s[..i],
        None => s,
    }
}

fn parse_directive(line: usize, rest: &str) -> Result<(ScalarReg, u64)> {
    let perr = |msg: String| Error::Parse { line, msg };
    let (name, value) = rest
        .trim()
        .split_once('=')
        .ok_or_else(|| perr("expected `@scalar <reg>=<hex64>`".into()))?;
    let reg = ScalarReg::parse(name.trim())
        .ok_or_else(|| perr(format!("unknown scalar register `{}`", name.trim())))?;
    let value = value.trim();
    let digits = value
        .strip_prefix("0x")
        .or_else(|| value.strip_prefix("0X"))
        .unwrap_or(value);
    let value = u64::from_str_radix(digits, 16)
        .map_err(|_| perr(format!("bad hex value `{value}`")))?;
    Ok((reg, value))
}

/// Parses one instruction line with all scalar registers reading as zero.
pub fn parse_trace_line(line: &str) -> Result<VInstr> {
    parse_line(1, strip_comment(line).trim(), &ScalarFile::new())
}

/// Parses one instruction, capturing forwarded scalars from `scalars`.
pub fn parse_line(line: usize, text: &str, scalars: &ScalarFile) -> Result<VInstr> {
    let text = text.trim();
    let (mnemonic, rest) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    if mnemonic.is_empty() {
        return Err(Error::Parse {
            line,
            msg: "empty instruction".into(),
        });
    }
    let mut ops: Vec<&str> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',').map(str::trim).collect()
    };
    let masked = ops.last() == Some(&"v0.t");
    if masked {
        ops.pop();
    }
    let mut p = Parser {
        line,
        mnemonic,
        ops,
        scalars,
    };
    let mut instr = p.decode()?;
    if masked {
        if instr.op == Opcode::Merge || !supports_mask(instr.op) {
            return Err(p.err("instruction cannot be masked"));
        }
        instr.masked = true;
    }
    Ok(instr)
}

fn supports_mask(op: Opcode) -> bool {
    !matches!(
        op,
        Opcode::SetVl
            | Opcode::MAnd
            | Opcode::MOr
            | Opcode::Mv
            | Opcode::MvXS
            | Opcode::MvSX
            | Opcode::FMvVF
            | Opcode::FMvFS
            | Opcode::FMvSF
            | Opcode::MvWhole
            | Opcode::Reshuffle
    )
}

struct Parser<'a> {
    line: usize,
    mnemonic: &'a str,
    ops: Vec<&'a str>,
    scalars: &'a ScalarFile,
}

/// Per-opcode operand shape for arithmetic-like instructions.
#[derive(Clone, Copy)]
enum Shape {
    /// `op vd, vs2, {vs1|rs1|imm}`
    Binary,
    /// `op vd, {vs1|rs1}, vs2`
    Macc,
}

const ARITH: &[(&str, Opcode, InstrKind, Shape, &[&str])] = &[
    ("vadd", Opcode::Add, InstrKind::ArithInt, Shape::Binary, &["vv", "vx", "vi"]),
    ("vsub", Opcode::Sub, InstrKind::ArithInt, Shape::Binary, &["vv", "vx"]),
    ("vand", Opcode::And, InstrKind::ArithInt, Shape::Binary, &["vv", "vx", "vi"]),
    ("vor", Opcode::Or, InstrKind::ArithInt, Shape::Binary, &["vv", "vx", "vi"]),
    ("vxor", Opcode::Xor, InstrKind::ArithInt, Shape::Binary, &["vv", "vx", "vi"]),
    ("vsll", Opcode::Sll, InstrKind::ArithInt, Shape::Binary, &["vv", "vx", "vi"]),
    ("vsrl", Opcode::Srl, InstrKind::ArithInt, Shape::Binary, &["vv", "vx", "vi"]),
    ("vmul", Opcode::Mul, InstrKind::ArithInt, Shape::Binary, &["vv", "vx"]),
    ("vfadd", Opcode::FAdd, InstrKind::ArithFp, Shape::Binary, &["vv", "vf"]),
    ("vfmul", Opcode::FMul, InstrKind::ArithFp, Shape::Binary, &["vv", "vf"]),
    ("vfdiv", Opcode::FDiv, InstrKind::ArithFp, Shape::Binary, &["vv", "vf"]),
    ("vfmacc", Opcode::FMacc, InstrKind::Fmacc, Shape::Macc, &["vv", "vf"]),
    ("vmseq", Opcode::MsEq, InstrKind::MaskOp, Shape::Binary, &["vv", "vx", "vi"]),
    ("vmslt", Opcode::MsLt, InstrKind::MaskOp, Shape::Binary, &["vv", "vx"]),
    ("vslideup", Opcode::SlideUp, InstrKind::Slide, Shape::Binary, &["vx", "vi"]),
    ("vslidedown", Opcode::SlideDown, InstrKind::Slide, Shape::Binary, &["vx", "vi"]),
    ("vslide1up", Opcode::Slide1Up, InstrKind::Slide, Shape::Binary, &["vx"]),
    ("vslide1down", Opcode::Slide1Down, InstrKind::Slide, Shape::Binary, &["vx"]),
    ("vfslide1down", Opcode::FSlide1Down, InstrKind::Slide, Shape::Binary, &["vf"]),
];

/// Every mnemonic accepted by the parser.
pub fn supported_set() -> Vec<String> {
    let mut out = vec!["vsetvli".to_string(), "vsetvl".to_string()];
    for w in [8, 16, 32, 64] {
        for p in ["vle", "vse", "vlse", "vsse", "vluxei", "vloxei", "vsuxei", "vsoxei"] {
            out.push(format!("{p}{w}.v"));
        }
    }
    for (base, _, _, _, forms) in ARITH {
        for f in *forms {
            out.push(format!("{base}.{f}"));
        }
    }
    for m in [
        "vredsum.vs",
        "vfredusum.vs",
        "vmand.mm",
        "vmor.mm",
        "vcpop.m",
        "vfirst.m",
        "vmerge.vvm",
        "vmerge.vxm",
        "vmerge.vim",
        "vmv.v.v",
        "vmv.v.x",
        "vmv.v.i",
        "vmv.x.s",
        "vmv.s.x",
        "vfmv.v.f",
        "vfmv.f.s",
        "vfmv.s.f",
        "vmv1r.v",
    ] {
        out.push(m.to_string());
    }
    out
}

/// True when `mnemonic` belongs to the supported subset.
pub fn is_supported(mnemonic: &str) -> bool {
    supported_set().iter().any(|m| m == mnemonic)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: format!("{}: {}", self.mnemonic, msg.into()),
        }
    }

    fn unsupported(&self) -> Error {
        Error::Unsupported {
            line: self.line,
            mnemonic: self.mnemonic.to_string(),
        }
    }

    fn expect_ops(&self, n: usize) -> Result<()> {
        if self.ops.len() != n {
            return Err(self.err(format!("expected {n} operands, found {}", self.ops.len())));
        }
        Ok(())
    }

    fn vreg(&self, idx: usize) -> Result<u8> {
        let s = self.ops[idx];
        s.strip_prefix('v')
            .and_then(|d| d.parse::<u8>().ok())
            .filter(|&n| n < 32 && !s[1..].starts_with('+'))
            .ok_or_else(|| self.err(format!("expected vector register, found `{s}`")))
    }

    fn sreg(&self, idx: usize) -> Result<ScalarReg> {
        let s = self.ops[idx];
        ScalarReg::parse(s).ok_or_else(|| self.err(format!("expected scalar register, found `{s}`")))
    }

    fn xreg(&self, idx: usize) -> Result<ScalarOperand> {
        let reg = self.sreg(idx)?;
        if !matches!(reg, ScalarReg::X(_)) {
            return Err(self.err(format!("expected integer register, found `{}`", self.ops[idx])));
        }
        Ok(self.capture(reg))
    }

    fn freg(&self, idx: usize) -> Result<ScalarOperand> {
        let reg = self.sreg(idx)?;
        if !matches!(reg, ScalarReg::F(_)) {
            return Err(self.err(format!("expected fp register, found `{}`", self.ops[idx])));
        }
        Ok(self.capture(reg))
    }

    fn capture(&self, reg: ScalarReg) -> ScalarOperand {
        ScalarOperand {
            reg,
            value: self.scalars.get(reg),
        }
    }

    fn imm(&self, idx: usize, lo: i64, hi: i64) -> Result<i64> {
        let s = self.ops[idx];
        let v = if let Some(h) = s.strip_prefix("0x") {
            i64::from_str_radix(h, 16).ok()
        } else if let Some(h) = s.strip_prefix("-0x") {
            i64::from_str_radix(h, 16).ok().map(|v| -v)
        } else {
            s.parse::<i64>().ok()
        };
        match v {
            Some(v) if (lo..=hi).contains(&v) => Ok(v),
            Some(v) => Err(self.err(format!("immediate {v} outside [{lo}, {hi}]"))),
            None => Err(self.err(format!("expected immediate, found `{s}`"))),
        }
    }

    fn base_addr(&self, idx: usize) -> Result<ScalarOperand> {
        let s = self.ops[idx];
        let inner = s
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| self.err(format!("expected `(rs1)`, found `{s}`")))?;
        let reg = ScalarReg::parse(inner.trim())
            .filter(|r| matches!(r, ScalarReg::X(_)))
            .ok_or_else(|| self.err(format!("bad base register `{inner}`")))?;
        Ok(self.capture(reg))
    }

    fn decode(&mut self) -> Result<VInstr> {
        let m = self.mnemonic;
        match m {
            "vsetvli" => return self.vsetvli(),
            "vsetvl" => return self.vsetvl(),
            "vmv1r.v" => {
                self.expect_ops(2)?;
                let mut i = VInstr::bare(m, Opcode::MvWhole, InstrKind::Move);
                i.form = OperandForm::VV;
                i.vd = self.vreg(0)?;
                i.vs2 = self.vreg(1)?;
                i.vl_spec = VlSpec::WholeRegister;
                return Ok(i);
            }
            _ => {}
        }
        if let Some(i) = self.memory()? {
            return Ok(i);
        }
        let (base, suffix) = m.split_once('.').ok_or_else(|| self.unsupported())?;
        if let Some(&(_, op, kind, shape, forms)) = ARITH.iter().find(|e| e.0 == base) {
            if !forms.contains(&suffix) {
                return Err(self.unsupported());
            }
            return self.arith(op, kind, shape, suffix);
        }
        match (base, suffix) {
            ("vredsum", "vs") | ("vfredusum", "vs") => {
                self.expect_ops(3)?;
                let op = if base == "vredsum" { Opcode::RedSum } else { Opcode::FRedUSum };
                let mut i = VInstr::bare(m, op, InstrKind::Reduction);
                i.form = OperandForm::VV;
                i.vd = self.vreg(0)?;
                i.vs2 = self.vreg(1)?;
                i.vs1 = self.vreg(2)?;
                Ok(i)
            }
            ("vmand", "mm") | ("vmor", "mm") => {
                self.expect_ops(3)?;
                let op = if base == "vmand" { Opcode::MAnd } else { Opcode::MOr };
                let mut i = VInstr::bare(m, op, InstrKind::MaskOp);
                i.form = OperandForm::VV;
                i.vd = self.vreg(0)?;
                i.vs2 = self.vreg(1)?;
                i.vs1 = self.vreg(2)?;
                Ok(i)
            }
            ("vcpop", "m") | ("vfirst", "m") => {
                self.expect_ops(2)?;
                let op = if base == "vcpop" { Opcode::CPop } else { Opcode::First };
                let mut i = VInstr::bare(m, op, InstrKind::MaskOp);
                i.rd = Some(self.int_rd(0)?);
                i.vs2 = self.vreg(1)?;
                Ok(i)
            }
            ("vmerge", "vvm" | "vxm" | "vim") => {
                self.expect_ops(4)?;
                if self.ops[3] != "v0" {
                    return Err(self.err("merge selector must be v0"));
                }
                let mut i = VInstr::bare(m, Opcode::Merge, InstrKind::Move);
                i.vd = self.vreg(0)?;
                i.vs2 = self.vreg(1)?;
                match suffix {
                    "vvm" => {
                        i.form = OperandForm::VV;
                        i.vs1 = self.vreg(2)?;
                    }
                    "vxm" => {
                        i.form = OperandForm::VX;
                        i.scalar_ops[0] = Some(self.xreg(2)?);
                    }
                    _ => {
                        i.form = OperandForm::VI;
                        i.imm = self.imm(2, -16, 15)?;
                    }
                }
                i.masked = true;
                Ok(i)
            }
            ("vmv", _) | ("vfmv", _) => self.moves(base, suffix),
            _ => Err(self.unsupported()),
        }
    }

    fn int_rd(&self, idx: usize) -> Result<ScalarReg> {
        let r = self.sreg(idx)?;
        if !matches!(r, ScalarReg::X(_)) {
            return Err(self.err("destination must be an integer register"));
        }
        Ok(r)
    }

    fn moves(&self, base: &str, suffix: &str) -> Result<VInstr> {
        let m = self.mnemonic;
        self.expect_ops(2)?;
        let mut i;
        match (base, suffix) {
            ("vmv", "v.v") => {
                i = VInstr::bare(m, Opcode::Mv, InstrKind::Move);
                i.form = OperandForm::VV;
                i.vd = self.vreg(0)?;
                i.vs1 = self.vreg(1)?;
            }
            ("vmv", "v.x") => {
                i = VInstr::bare(m, Opcode::Mv, InstrKind::Move);
                i.form = OperandForm::VX;
                i.vd = self.vreg(0)?;
                i.scalar_ops[0] = Some(self.xreg(1)?);
            }
            ("vmv", "v.i") => {
                i = VInstr::bare(m, Opcode::Mv, InstrKind::Move);
                i.form = OperandForm::VI;
                i.vd = self.vreg(0)?;
                i.imm = self.imm(1, -16, 15)?;
            }
            ("vmv", "x.s") => {
                i = VInstr::bare(m, Opcode::MvXS, InstrKind::Move);
                i.rd = Some(self.int_rd(0)?);
                i.vs2 = self.vreg(1)?;
            }
            ("vmv", "s.x") => {
                i = VInstr::bare(m, Opcode::MvSX, InstrKind::Move);
                i.form = OperandForm::VX;
                i.vd = self.vreg(0)?;
                i.scalar_ops[0] = Some(self.xreg(1)?);
            }
            ("vfmv", "v.f") => {
                i = VInstr::bare(m, Opcode::FMvVF, InstrKind::Move);
                i.form = OperandForm::VF;
                i.vd = self.vreg(0)?;
                i.scalar_ops[0] = Some(self.freg(1)?);
            }
            ("vfmv", "f.s") => {
                i = VInstr::bare(m, Opcode::FMvFS, InstrKind::Move);
                let rd = self.sreg(0)?;
                if !matches!(rd, ScalarReg::F(_)) {
                    return Err(self.err("destination must be an fp register"));
                }
                i.rd = Some(rd);
                i.vs2 = self.vreg(1)?;
            }
            ("vfmv", "s.f") => {
                i = VInstr::bare(m, Opcode::FMvSF, InstrKind::Move);
                i.form = OperandForm::VF;
                i.vd = self.vreg(0)?;
                i.scalar_ops[0] = Some(self.freg(1)?);
            }
            _ => return Err(self.unsupported()),
        }
        Ok(i)
    }

    fn arith(&self, op: Opcode, kind: InstrKind, shape: Shape, suffix: &str) -> Result<VInstr> {
        self.expect_ops(3)?;
        let mut i = VInstr::bare(self.mnemonic, op, kind);
        i.vd = self.vreg(0)?;
        // Macc lists the multiplier first: `vfmacc vd, {vs1|fs1}, vs2`.
        let (src, vec2) = match shape {
            Shape::Binary => (2, 1),
            Shape::Macc => (1, 2),
        };
        i.vs2 = self.vreg(vec2)?;
        match suffix {
            "vv" => {
                i.form = OperandForm::VV;
                i.vs1 = self.vreg(src)?;
            }
            "vx" => {
                i.form = OperandForm::VX;
                i.scalar_ops[0] = Some(self.xreg(src)?);
            }
            "vf" => {
                i.form = OperandForm::VF;
                i.scalar_ops[0] = Some(self.freg(src)?);
            }
            "vi" => {
                i.form = OperandForm::VI;
                let unsigned = matches!(
                    op,
                    Opcode::Sll | Opcode::Srl | Opcode::SlideUp | Opcode::SlideDown
                );
                i.imm = if unsigned {
                    self.imm(src, 0, 31)?
                } else {
                    self.imm(src, -16, 15)?
                };
            }
            _ => return Err(self.unsupported()),
        }
        Ok(i)
    }

    fn memory(&self) -> Result<Option<VInstr>> {
        const PREFIXES: [(&str, bool, Addressing); 8] = [
            ("vluxei", true, Addressing::Indexed),
            ("vloxei", true, Addressing::Indexed),
            ("vsuxei", false, Addressing::Indexed),
            ("vsoxei", false, Addressing::Indexed),
            ("vlse", true, Addressing::Strided),
            ("vsse", false, Addressing::Strided),
            ("vle", true, Addressing::Unit),
            ("vse", false, Addressing::Unit),
        ];
        let m = self.mnemonic;
        let Some(&(prefix, is_load, addressing)) =
            PREFIXES.iter().find(|(p, _, _)| m.starts_with(p))
        else {
            return Ok(None);
        };
        let Some(width) = m[prefix.len()..]
            .strip_suffix(".v")
            .and_then(|w| w.parse::<u32>().ok())
            .and_then(Ew::from_bits)
        else {
            // Segment and fault-only-first forms share these prefixes.
            return Err(self.unsupported());
        };
        let (op, kind) = if is_load {
            (Opcode::Load, InstrKind::Load)
        } else {
            (Opcode::Store, InstrKind::Store)
        };
        let mut i = VInstr::bare(m, op, kind);
        i.addressing = addressing;
        match addressing {
            Addressing::Unit => self.expect_ops(2)?,
            _ => self.expect_ops(3)?,
        }
        i.vd = self.vreg(0)?;
        i.scalar_ops[0] = Some(self.base_addr(1)?);
        match addressing {
            Addressing::Strided => {
                i.scalar_ops[1] = Some(self.xreg(2)?);
                i.eew_vd = Some(width);
            }
            Addressing::Indexed => {
                i.vs2 = self.vreg(2)?;
                i.eew_vs2 = Some(width);
            }
            _ => i.eew_vd = Some(width),
        }
        Ok(Some(i))
    }

    fn vsetvli(&self) -> Result<VInstr> {
        if self.ops.len() < 4 || self.ops.len() > 6 {
            return Err(self.err("expected `vsetvli rd, rs1, eN, mN[, ta|tu, ma|mu]`"));
        }
        let mut i = VInstr::bare(self.mnemonic, Opcode::SetVl, InstrKind::Vsetvl);
        i.rd = Some(self.int_rd(0)?);
        i.scalar_ops[0] = Some(self.xreg(1)?);
        let sew = self.ops[2]
            .strip_prefix('e')
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| self.err(format!("bad SEW `{}`", self.ops[2])))?;
        let lmul = self.ops[3]
            .strip_prefix('m')
            .and_then(|s| s.parse::<u8>().ok())
            .ok_or_else(|| self.err(format!("bad LMUL `{}`", self.ops[3])))?;
        for pol in &self.ops[4..] {
            if !matches!(*pol, "ta" | "tu" | "ma" | "mu") {
                return Err(self.err(format!("bad policy `{pol}`")));
            }
        }
        i.vtype_imm = Some((sew, lmul));
        Ok(i)
    }

    fn vsetvl(&self) -> Result<VInstr> {
        self.expect_ops(3)?;
        let mut i = VInstr::bare(self.mnemonic, Opcode::SetVl, InstrKind::Vsetvl);
        i.rd = Some(self.int_rd(0)?);
        i.scalar_ops[0] = Some(self.xreg(1)?);
        i.scalar_ops[1] = Some(self.xreg(2)?);
        Ok(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmacc_vf_fields() {
        let i = parse_trace_line("vfmacc.vf v8, f0, v4").unwrap();
        assert_eq!(i.kind, InstrKind::Fmacc);
        assert_eq!((i.vd, i.vs2), (8, 4));
        assert_eq!(i.scalar_ops[0].unwrap().reg, ScalarReg::F(0));
    }

    #[test]
    fn unit_load_fields() {
        let i = parse_trace_line("vle64.v v4, (a1)").unwrap();
        assert_eq!(i.kind, InstrKind::Load);
        assert_eq!(i.addressing, Addressing::Unit);
        assert_eq!(i.eew_vd, Some(Ew::E64));
    }

    #[test]
    fn whole_register_move_is_aliased() {
        let i = parse_trace_line("vmv1r.v v2, v3").unwrap();
        assert_eq!(i.kind, InstrKind::Move);
        assert_eq!(i.vl_spec, VlSpec::WholeRegister);
    }

    #[test]
    fn membership() {
        assert!(is_supported("vfmacc.vf"));
        assert!(is_supported("vsoxei32.v"));
        assert!(!is_supported("vsseg4e32.v"));
        assert!(matches!(
            parse_trace_line("vsseg4e32.v v4, (a0)"),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn scalar_directives_are_captured() {
        let t = Trace::parse(
            "# setup\n@scalar a0=0x40\n@scalar ft0=3ff0000000000000\nvle64.v v1, (a0)\nvfmul.vf v2, v1, ft0 # scale\n",
        )
        .unwrap();
        assert_eq!(t.instrs.len(), 2);
        assert_eq!(t.instrs[0].scalar(0), 0x40);
        assert_eq!(t.instrs[1].scalar(0), 1.0f64.to_bits());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Trace::parse("vadd.vv v1, v2, v3\nvadd.vv v1, v2\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = Trace::parse("\n\nvfoo.vv v1, v2, v3").unwrap_err();
        assert!(matches!(e, Error::Unsupported { line: 3, .. }));
    }

    #[test]
    fn masked_suffix() {
        let i = parse_trace_line("vadd.vi v4, v8, -3, v0.t").unwrap();
        assert!(i.masked);
        assert_eq!(i.imm, -3);
        assert!(parse_trace_line("vmv.v.i v4, 3, v0.t").is_err());
    }

    #[test]
    fn every_supported_mnemonic_has_a_parse() {
        for m in supported_set() {
            let line = example_line(&m);
            parse_trace_line(&line).unwrap_or_else(|e| panic!("{line}: {e}"));
        }
    }

    fn example_line(m: &str) -> String {
        let (base, suffix) = m.split_once('.').unwrap_or((m, ""));
        if m == "vsetvli" {
            return "vsetvli t0, a0, e32, m2, ta, ma".into();
        }
        if m == "vsetvl" {
            return "vsetvl t0, a0, a1".into();
        }
        if base.starts_with("vlse") || base.starts_with("vsse") {
            return format!("{m} v4, (a0), t1");
        }
        if base.contains("xei") {
            return format!("{m} v4, (a0), v8");
        }
        if base.starts_with("vle") || base.starts_with("vse") {
            return format!("{m} v4, (a0)");
        }
        match m {
            "vcpop.m" | "vfirst.m" | "vmv.x.s" => return format!("{m} a0, v4"),
            "vfmv.f.s" => return format!("{m} fa0, v4"),
            "vmv.s.x" | "vmv.v.x" => return format!("{m} v4, a0"),
            "vfmv.s.f" | "vfmv.v.f" => return format!("{m} v4, fa0"),
            "vmv.v.v" | "vmv1r.v" => return format!("{m} v4, v8"),
            "vmv.v.i" => return format!("{m} v4, 5"),
            _ => {}
        }
        match suffix {
            "vv" | "vs" | "mm" => format!("{m} v4, v8, v12"),
            "vx" => format!("{m} v4, v8, a0"),
            "vf" if base == "vfmacc" => format!("{m} v4, fa0, v8"),
            "vf" => format!("{m} v4, v8, fa0"),
            "vi" => format!("{m} v4, v8, 3"),
            "vvm" => format!("{m} v4, v8, v12, v0"),
            "vxm" => format!("{m} v4, v8, a0, v0"),
            "vim" => format!("{m} v4, v8, 1, v0"),
            _ => panic!("no example for {m}"),
        }
    }
}
