"""Embedded example programs.

All three are in the tractable fragment and exercise different compiler
paths: `qft` has two nested recursion groups plus a swap-based reversal,
`teleport` recurses three qubits at a time with CNOT/phase corrections,
and `branching` recurses through two orthogonal quantum-case branches of
different sizes — the program whose naive expansion is exponential but
whose merged compilation is linear.
"""

QFT_SOURCE = """\
// Quantum Fourier transform on all input qubits.
decl rec(p) {
  p[1] *= H;
  call rot[2](p);
  call rec(p \\ [1]);
},
decl rot[x](p) {
  if size(p) > 1 then {
    qcase p[2] of {
      0 -> skip;
      ,
      1 -> p[1] *= PH[pi / 2^(x - 1)](x);
    }
    call rot[x + 1](p \\ [2]);
  } else {
    skip;
  }
},
decl inv(p) {
  if size(p) > 1 then {
    SWAP(p[1], p[size(p)]);
    call inv(p \\ [1, size(p)]);
  } else {
    skip;
  }
},
::
call rec(q);
call inv(q);
"""

TELEPORT_SOURCE = """\
// Teleport an n-qubit payload through n Bell pairs (deferred measurement).
// Input layout: n payload qubits followed by 2n zero qubits; payload qubit i
// ends at position 3n - 2(i - 1).
decl createBell(p) {
  if size(p) >= 3 then {
    p[size(p) - 1] *= H;
    CNOT(p[size(p) - 1], p[size(p)]);
    call createBell(p \\ [1, size(p) - 1, size(p)]);
  } else {
    skip;
  }
},
decl teleport(p) {
  if size(p) >= 3 then {
    CNOT(p[1], p[size(p) - 1]);
    p[1] *= H;
    CNOT(p[size(p) - 1], p[size(p)]);
    qcase p[1] of {
      0 -> skip;
      ,
      1 -> p[size(p)] *= PH[pi](0);
    }
    call teleport(p \\ [1, size(p) - 1, size(p)]);
  } else {
    skip;
  }
},
::
call createBell(q);
call teleport(q);
"""

BRANCHING_SOURCE = """\
// Branching recursion: drop one qubit in the 0-branch, two in the 11-branch.
// Naive expansion is exponential in n; the merged compilation is linear.
decl proc(p) {
  if size(p) > 2 then {
    qcase p[1] of {
      0 -> call proc(p \\ [1]);
      ,
      1 -> qcase p[2] of {
             0 -> skip;
             ,
             1 -> call proc(p \\ [1, 1]);
           }
    }
  } else {
    p[1] *= RY[pi / 4](0);
  }
},
::
call proc(q);
"""

EXAMPLES = {
    "qft.foq": QFT_SOURCE,
    "teleport.foq": TELEPORT_SOURCE,
    "appendix-b.foq": BRANCHING_SOURCE,
}
