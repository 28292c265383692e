//! Structural VHDL emission.
//!
//! Emits a deterministic, technology-agnostic VHDL-93 description of the
//! converter for synthesis outside this crate: one entity per block,
//! explicit instances (sorted by line and tap index) so the instance
//! counts match the configuration, and per-instance delay generics in
//! femtoseconds for the buffer cells. Delay elements are plain entities
//! with a `DELAY : time` generic since physical buffer delays are
//! placement-dependent; the emitted text promises topology, not timing
//! closure.
//!
//! The generated files are outputs of this artifact, not a component of
//! it: nothing here simulates the emitted HDL. Fidelity is checked by
//! comparing the manifest's instance counts against the simulator's
//! netlist counts for the same configuration.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::dtdc::TdcConfig;
use crate::error::Error;

/// Output dialect. Only structural VHDL is produced.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default)]
pub enum HdlFormat {
    #[default]
    VhdlStructural,
}

/// A code-generation request.
#[derive(Clone, Debug)]
pub struct CodegenRequest {
    pub cfg: TdcConfig,
    pub top_name: String,
    pub format: HdlFormat,
}

impl CodegenRequest {
    pub fn new(cfg: TdcConfig, top_name: &str) -> CodegenRequest {
        CodegenRequest {
            cfg,
            top_name: top_name.to_string(),
            format: HdlFormat::VhdlStructural,
        }
    }
}

/// One emitted text file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratedFile {
    pub name: String,
    pub contents: String,
}

/// Machine-readable instance and port inventory of one emission. The
/// `buffers`/`counters`/`adders`/`muxes` counts describe a single fine
/// interpolator; the converter instantiates `fine_tdc_instances` of them.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Manifest {
    pub top: String,
    pub buffers: u64,
    pub counters: u64,
    pub adders: u64,
    pub muxes: u64,
    pub fine_tdc_instances: u64,
    pub coarse_counters: u64,
    pub alus: u64,
    pub tpg_dffs: u64,
    pub tpg_nors: u64,
    pub tpg_xors: u64,
    pub tpg_inverters: u64,
    pub files: Vec<String>,
    pub cfg: TdcConfig,
}

impl Manifest {
    /// Deterministic JSON rendering with a fixed key order.
    pub fn to_json(&self) -> String {
        let cfg = &self.cfg;
        let lsb = cfg.lsb();
        let mut s = String::new();
        let _ = write!(
            s,
            "{{\n  \"top\": \"{}\",\n  \"format\": \"vhdl-structural\",\n  \"files\": [",
            self.top
        );
        for (i, f) in self.files.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "\"{f}\"");
        }
        let _ = writeln!(
            s,
            "],\n  \"buffers\": {},\n  \"counters\": {},\n  \"adders\": {},\n  \"muxes\": {},",
            self.buffers, self.counters, self.adders, self.muxes
        );
        let _ = writeln!(
            s,
            "  \"fine_tdc_instances\": {},\n  \"coarse_counters\": {},\n  \"alus\": {},",
            self.fine_tdc_instances, self.coarse_counters, self.alus
        );
        let _ = writeln!(
            s,
            "  \"tpg\": {{\"dffs\": {}, \"nors\": {}, \"xors\": {}, \"inverters\": {}}},",
            self.tpg_dffs, self.tpg_nors, self.tpg_xors, self.tpg_inverters
        );
        s.push_str(
            "  \"ports\": {\"top\": [\"clk\", \"rst\", \"tin\", \"dout\", \"overflow\"]},\n",
        );
        let _ = write!(
            s,
            "  \"config\": {{\n    \"f_clk_hz\": {},\n    \"t_clk_fs\": {},\n    \"n_lines\": {},\n    \"taps_per_line\": {},\n    \"cell_delay_fs\": {},\n    \"line_offset_fs\": {},\n    \"counter_width\": {},\n    \"adder_width\": {},\n    \"coarse_width\": {},\n    \"scale_k\": {},\n    \"lsb_fs_num\": {},\n    \"lsb_fs_den\": {},\n    \"perturbed\": {}",
            cfg.f_clk_hz,
            cfg.t_clk().fs(),
            cfg.fine.n_lines,
            cfg.fine.taps_per_line,
            cfg.fine.cell_delay.fs(),
            cfg.fine.line_offset.fs(),
            cfg.fine.counter_width,
            cfg.fine.adder_width,
            cfg.coarse_width,
            cfg.scale_k(),
            lsb.num(),
            lsb.den(),
            cfg.fine.tap_perturbations.is_some()
        );
        if let Some(seed) = cfg.fine.seed {
            let _ = write!(s, ",\n    \"seed\": {seed}");
        }
        s.push_str("\n  }\n}\n");
        s
    }
}

/// Computes the inventory for a request without rendering the HDL.
pub fn manifest(req: &CodegenRequest) -> Result<Manifest, Error> {
    validate_identifier(&req.top_name)?;
    req.cfg.validate()?;
    let fine = &req.cfg.fine;
    let taps = fine.n_taps_total() as u64;
    Ok(Manifest {
        top: req.top_name.clone(),
        buffers: taps,
        counters: taps,
        adders: fine.n_lines as u64 * (fine.taps_per_line as u64 - 1),
        muxes: 1,
        fine_tdc_instances: 2,
        coarse_counters: 1,
        alus: 1,
        tpg_dffs: 6,
        tpg_nors: 2,
        tpg_xors: 1,
        tpg_inverters: 1,
        files: vec![
            "fine_tdc.vhd".to_string(),
            "manifest.json".to_string(),
            "primitives.vhd".to_string(),
            "top.vhd".to_string(),
            "tpg.vhd".to_string(),
        ],
        cfg: req.cfg.clone(),
    })
}

/// Emits the complete file set for a request: `primitives.vhd`,
/// `tpg.vhd`, `fine_tdc.vhd`, `top.vhd` and `manifest.json`.
/// Byte-identical output for identical requests.
pub fn emit(req: &CodegenRequest) -> Result<Vec<GeneratedFile>, Error> {
    let manifest = manifest(req)?;
    let HdlFormat::VhdlStructural = req.format;
    Ok(vec![
        GeneratedFile {
            name: "primitives.vhd".to_string(),
            contents: emit_primitives(&req.cfg),
        },
        GeneratedFile {
            name: "tpg.vhd".to_string(),
            contents: emit_tpg(),
        },
        GeneratedFile {
            name: "fine_tdc.vhd".to_string(),
            contents: emit_fine_tdc(&req.cfg)?,
        },
        GeneratedFile {
            name: "top.vhd".to_string(),
            contents: emit_top(req),
        },
        GeneratedFile {
            name: "manifest.json".to_string(),
            contents: manifest.to_json(),
        },
    ])
}

const RESERVED: &[&str] = &[
    "architecture",
    "begin",
    "case",
    "component",
    "configuration",
    "constant",
    "downto",
    "else",
    "elsif",
    "end",
    "entity",
    "for",
    "generic",
    "if",
    "in",
    "inout",
    "is",
    "library",
    "loop",
    "map",
    "of",
    "others",
    "out",
    "port",
    "process",
    "signal",
    "then",
    "to",
    "type",
    "use",
    "variable",
    "wait",
    "when",
    "while",
    "with",
    // entity names emitted by this generator
    "delay_buffer",
    "dff_rise",
    "inv1",
    "nor2",
    "xor2",
    "counter_en",
    "adder_fixed",
    "alu_compose",
    "line_mux",
    "tpg",
    "fine_tdc",
];

/// Checks VHDL basic-identifier rules: a leading letter, letters, digits
/// and single underscores, no trailing underscore, and no collision with
/// reserved words or the generator's own entity names.
pub fn validate_identifier(name: &str) -> Result<(), Error> {
    let valid_shape = !name.is_empty()
        && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.contains("__")
        && !name.ends_with('_');
    let lowered = name.to_ascii_lowercase();
    if !valid_shape || RESERVED.contains(&lowered.as_str()) {
        return Err(Error::InvalidIdentifier(name.to_string()));
    }
    Ok(())
}

const HEADER: &str = "-- Generated structural VHDL. Do not edit; regenerate instead.\n\
                      library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n\n";

fn emit_primitives(cfg: &TdcConfig) -> String {
    let cw = cfg.fine.counter_width;
    let aw = cfg.fine.adder_width;
    let k = cfg.scale_k();
    let mut s = String::from(HEADER);

    let _ = writeln!(s, "entity delay_buffer is\n  generic (DELAY : time := {} fs);\n  port (i : in std_logic; o : out std_logic);\nend entity delay_buffer;\n\narchitecture behavioral of delay_buffer is\nbegin\n  o <= transport i after DELAY;\nend architecture behavioral;\n",
        cfg.fine.cell_delay.fs()
    );

    s.push_str(
        "entity dff_rise is\n  port (clk, rst, d : in std_logic; q : out std_logic; qn : out std_logic);\nend entity dff_rise;\n\narchitecture behavioral of dff_rise is\n  signal state : std_logic := '0';\nbegin\n  process (clk, rst)\n  begin\n    if rst = '1' then\n      state <= '0';\n    elsif rising_edge(clk) then\n      state <= d;\n    end if;\n  end process;\n  q <= state;\n  qn <= not state;\nend architecture behavioral;\n\n",
    );

    s.push_str(
        "entity inv1 is\n  port (i : in std_logic; o : out std_logic);\nend entity inv1;\n\narchitecture behavioral of inv1 is\nbegin\n  o <= not i;\nend architecture behavioral;\n\n",
    );

    s.push_str(
        "entity nor2 is\n  port (a, b : in std_logic; y : out std_logic);\nend entity nor2;\n\narchitecture behavioral of nor2 is\nbegin\n  y <= a nor b;\nend architecture behavioral;\n\n",
    );

    s.push_str(
        "entity xor2 is\n  port (a, b : in std_logic; y : out std_logic);\nend entity xor2;\n\narchitecture behavioral of xor2 is\nbegin\n  y <= a xor b;\nend architecture behavioral;\n\n",
    );

    let _ = writeln!(s, "entity counter_en is\n  generic (WIDTH : integer := {cw});\n  port (clk, rst, en, gate : in std_logic;\n        value : out std_logic_vector(WIDTH - 1 downto 0);\n        overflow : out std_logic);\nend entity counter_en;\n\narchitecture rtl of counter_en is\n  constant MAX_COUNT : unsigned(WIDTH - 1 downto 0) := (others => '1');\n  signal count : unsigned(WIDTH - 1 downto 0) := (others => '0');\n  signal saturated : std_logic := '0';\nbegin\n  process (clk, rst)\n  begin\n    if rst = '1' then\n      count <= (others => '0');\n      saturated <= '0';\n    elsif rising_edge(clk) then\n      if en = '1' and gate = '1' then\n        if count = MAX_COUNT then\n          saturated <= '1';\n        else\n          count <= count + 1;\n        end if;\n      end if;\n    end if;\n  end process;\n  value <= std_logic_vector(count);\n  overflow <= saturated;\nend architecture rtl;\n"
    );

    let _ = writeln!(s, "entity adder_fixed is\n  generic (WIDTH : integer := {aw});\n  port (a, b : in std_logic_vector(WIDTH - 1 downto 0);\n        sum : out std_logic_vector(WIDTH - 1 downto 0);\n        carry : out std_logic);\nend entity adder_fixed;\n\narchitecture rtl of adder_fixed is\n  signal wide : unsigned(WIDTH downto 0);\nbegin\n  wide <= resize(unsigned(a), WIDTH + 1) + resize(unsigned(b), WIDTH + 1);\n  sum <= std_logic_vector(wide(WIDTH - 1 downto 0));\n  carry <= wide(WIDTH);\nend architecture rtl;\n"
    );

    let _ = writeln!(s, "entity alu_compose is\n  generic (WIDTH : integer := {aw}; SCALE_K : integer := {k});\n  port (coarse, fine_start, fine_stop : in std_logic_vector(WIDTH - 1 downto 0);\n        dout : out std_logic_vector(WIDTH - 1 downto 0);\n        overflow : out std_logic);\nend entity alu_compose;\n\narchitecture rtl of alu_compose is\nbegin\n  process (coarse, fine_start, fine_stop)\n    variable acc : unsigned(2 * WIDTH - 1 downto 0);\n  begin\n    acc := resize(unsigned(coarse) * to_unsigned(SCALE_K, WIDTH), 2 * WIDTH);\n    acc := acc + resize(unsigned(fine_start), 2 * WIDTH);\n    if acc(2 * WIDTH - 1 downto WIDTH) /= to_unsigned(0, WIDTH)\n       or acc < resize(unsigned(fine_stop), 2 * WIDTH) then\n      overflow <= '1';\n    else\n      overflow <= '0';\n    end if;\n    acc := acc - resize(unsigned(fine_stop), 2 * WIDTH);\n    dout <= std_logic_vector(acc(WIDTH - 1 downto 0));\n  end process;\nend architecture rtl;"
    );
    s
}

fn emit_tpg() -> String {
    let mut s = String::from(HEADER);
    s.push_str(
        "entity tpg is\n  port (clk, rst, tin : in std_logic;\n        tf1, tf2, tc : out std_logic);\nend entity tpg;\n\narchitecture structural of tpg is\n  signal tin_n, start_q, start_n, stop_q, stop_n : std_logic;\n  signal q1, q2, q1d, q2d : std_logic;\nbegin\n  u_inv    : entity work.inv1 port map (i => tin, o => tin_n);\n  u_start  : entity work.dff_rise port map (clk => tin, rst => rst, d => '1', q => start_q, qn => start_n);\n  u_stop   : entity work.dff_rise port map (clk => tin_n, rst => rst, d => '1', q => stop_q, qn => stop_n);\n  u_sync1  : entity work.dff_rise port map (clk => clk, rst => rst, d => start_q, q => q1, qn => open);\n  u_sync2  : entity work.dff_rise port map (clk => clk, rst => rst, d => stop_q, q => q2, qn => open);\n  u_delay1 : entity work.dff_rise port map (clk => clk, rst => rst, d => q1, q => q1d, qn => open);\n  u_delay2 : entity work.dff_rise port map (clk => clk, rst => rst, d => q2, q => q2d, qn => open);\n  u_nor1   : entity work.nor2 port map (a => start_n, b => q1d, y => tf1);\n  u_nor2   : entity work.nor2 port map (a => stop_n, b => q2d, y => tf2);\n  u_xor    : entity work.xor2 port map (a => q1, b => q2, y => tc);\nend architecture structural;\n",
    );
    s
}

fn emit_fine_tdc(cfg: &TdcConfig) -> Result<String, Error> {
    let fine = &cfg.fine;
    let lines = fine.n_lines;
    let taps = fine.taps_per_line;
    let cw = fine.counter_width;
    let aw = fine.adder_width;
    let mut s = String::from(HEADER);

    // per-configuration readout multiplexer over the line sums
    let _ = writeln!(s, "entity line_mux is\n  generic (WIDTH : integer := {aw});\n  port (sel : in integer range 0 to {};",
        lines - 1
    );
    for l in 0..lines {
        let _ = writeln!(
            s,
            "        in{l} : in std_logic_vector(WIDTH - 1 downto 0);"
        );
    }
    s.push_str("        y : out std_logic_vector(WIDTH - 1 downto 0));\nend entity line_mux;\n\narchitecture rtl of line_mux is\nbegin\n  process (sel");
    for l in 0..lines {
        let _ = write!(s, ", in{l}");
    }
    s.push_str(")\n  begin\n    case sel is\n");
    for l in 0..lines {
        if l + 1 == lines {
            let _ = writeln!(s, "      when others => y <= in{l};");
        } else {
            let _ = writeln!(s, "      when {l} => y <= in{l};");
        }
    }
    s.push_str("    end case;\n  end process;\nend architecture rtl;\n\n");

    // the interpolator proper
    let _ = writeln!(s, "entity fine_tdc is\n  generic (CW : integer := {cw}; AW : integer := {aw});\n  port (clk, rst, pulse_in, en : in std_logic;\n        read_sel : in integer range 0 to {};\n        line_code : out std_logic_vector(AW - 1 downto 0);\n        total : out std_logic_vector(AW - 1 downto 0);\n        overflow : out std_logic);\nend entity fine_tdc;\n\narchitecture structural of fine_tdc is",
        lines - 1
    );
    for l in 0..lines {
        for k in 0..taps {
            let _ = writeln!(s, "  signal tap_l{l}_t{k} : std_logic;");
        }
    }
    for l in 0..lines {
        for k in 0..taps {
            let _ = writeln!(s, "  signal cval_l{l}_t{k} : std_logic_vector(CW - 1 downto 0);\n  signal cw_l{l}_t{k} : std_logic_vector(AW - 1 downto 0);\n  signal cov_l{l}_t{k} : std_logic;"
            );
        }
    }
    for l in 0..lines {
        for st in 0..taps.saturating_sub(1) {
            let _ = writeln!(s, "  signal sum_l{l}_s{st} : std_logic_vector(AW - 1 downto 0);\n  signal carry_l{l}_s{st} : std_logic;"
            );
        }
        let _ = writeln!(
            s,
            "  signal line_sum_l{l} : std_logic_vector(AW - 1 downto 0);"
        );
    }
    s.push_str("begin\n");

    // buffer chains: first cell of each line absorbs the line stagger
    for l in 0..lines {
        for k in 0..taps {
            let delta = if k == 0 {
                fine.tap_delay(l, 0)?
            } else {
                fine.tap_delay(l, k)? - fine.tap_delay(l, k - 1)?
            };
            let source = if k == 0 {
                "pulse_in".to_string()
            } else {
                format!("tap_l{l}_t{}", k - 1)
            };
            let _ = writeln!(s, "  buf_l{l}_t{k} : entity work.delay_buffer generic map (DELAY => {} fs) port map (i => {source}, o => tap_l{l}_t{k});",
                delta.fs()
            );
        }
    }
    s.push('\n');
    for l in 0..lines {
        for k in 0..taps {
            let _ = writeln!(s, "  cnt_l{l}_t{k} : entity work.counter_en generic map (WIDTH => CW) port map (clk => clk, rst => rst, en => en, gate => tap_l{l}_t{k}, value => cval_l{l}_t{k}, overflow => cov_l{l}_t{k});"
            );
        }
    }
    s.push('\n');
    for l in 0..lines {
        for k in 0..taps {
            let _ = writeln!(
                s,
                "  cw_l{l}_t{k} <= std_logic_vector(resize(unsigned(cval_l{l}_t{k}), AW));"
            );
        }
    }
    s.push('\n');
    for l in 0..lines {
        if taps == 1 {
            let _ = writeln!(s, "  line_sum_l{l} <= cw_l{l}_t0;");
            continue;
        }
        for st in 0..taps - 1 {
            let a = if st == 0 {
                format!("cw_l{l}_t0")
            } else {
                format!("sum_l{l}_s{}", st - 1)
            };
            let _ = writeln!(s, "  add_l{l}_s{st} : entity work.adder_fixed generic map (WIDTH => AW) port map (a => {a}, b => cw_l{l}_t{}, sum => sum_l{l}_s{st}, carry => carry_l{l}_s{st});",
                st + 1
            );
        }
        let _ = writeln!(s, "  line_sum_l{l} <= sum_l{l}_s{};", taps - 2);
    }
    s.push('\n');

    // sequential readout surface
    s.push_str(
        "  u_mux : entity work.line_mux generic map (WIDTH => AW) port map (sel => read_sel",
    );
    for l in 0..lines {
        let _ = write!(s, ", in{l} => line_sum_l{l}");
    }
    s.push_str(", y => line_code);\n\n");

    // steady-state grand total over the line sums
    s.push_str("  total <= std_logic_vector(");
    for l in 0..lines {
        if l > 0 {
            s.push_str(" + ");
        }
        let _ = write!(s, "unsigned(line_sum_l{l})");
    }
    s.push_str(");\n\n  overflow <=");
    let mut first = true;
    for l in 0..lines {
        for k in 0..taps {
            if !first {
                s.push_str(" or");
            }
            first = false;
            let _ = write!(s, "\n    cov_l{l}_t{k}");
        }
        for st in 0..taps.saturating_sub(1) {
            let _ = write!(s, " or\n    carry_l{l}_s{st}");
        }
    }
    s.push_str(";\nend architecture structural;\n");
    Ok(s)
}

fn emit_top(req: &CodegenRequest) -> String {
    let cfg = &req.cfg;
    let aw = cfg.fine.adder_width;
    let lines = cfg.fine.n_lines;
    let top = &req.top_name;
    let mut s = String::from(HEADER);
    let _ = writeln!(s, "entity {top} is\n  port (clk, rst, tin : in std_logic;\n        line_sel : in integer range 0 to {};\n        dout : out std_logic_vector({} downto 0);\n        overflow : out std_logic);\nend entity {top};\n\narchitecture structural of {top} is\n  signal tf1, tf2, tc : std_logic;\n  signal f1_total, f2_total : std_logic_vector({} downto 0);\n  signal f1_line, f2_line : std_logic_vector({} downto 0);\n  signal nc_value : std_logic_vector({} downto 0);\n  signal nc_wide : std_logic_vector({} downto 0);\n  signal f1_ov, f2_ov, nc_ov, alu_ov : std_logic;\nbegin",
        lines - 1,
        aw - 1,
        aw - 1,
        aw - 1,
        cfg.coarse_width - 1,
        aw - 1
    );
    let _ = writeln!(s, "  u_tpg : entity work.tpg port map (clk => clk, rst => rst, tin => tin, tf1 => tf1, tf2 => tf2, tc => tc);\n\n  u_fine1 : entity work.fine_tdc port map (clk => clk, rst => rst, pulse_in => tf1, en => '1', read_sel => line_sel, line_code => f1_line, total => f1_total, overflow => f1_ov);\n  u_fine2 : entity work.fine_tdc port map (clk => clk, rst => rst, pulse_in => tf2, en => '1', read_sel => line_sel, line_code => f2_line, total => f2_total, overflow => f2_ov);\n\n  u_coarse : entity work.counter_en generic map (WIDTH => {}) port map (clk => clk, rst => rst, en => '1', gate => tc, value => nc_value, overflow => nc_ov);\n  nc_wide <= std_logic_vector(resize(unsigned(nc_value), {aw}));\n\n  u_alu : entity work.alu_compose port map (coarse => nc_wide, fine_start => f1_total, fine_stop => f2_total, dout => dout, overflow => alu_ov);\n\n  overflow <= f1_ov or f2_ov or nc_ov or alu_ov;\nend architecture structural;",
        cfg.coarse_width
    );
    s
}
