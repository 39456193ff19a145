use std::fmt;

use super::QqaError;

/// One coordinate of a mixed-radix basis; its radix is the number of labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub labels: Vec<String>,
}

impl Register {
    pub fn labeled(name: &str, labels: &[&str]) -> Self {
        Self { name: name.to_string(), labels: labels.iter().map(|s| s.to_string()).collect() }
    }

    /// Integer values `lo..=hi`; digit `d` stands for `lo + d`.
    pub fn range(name: &str, lo: i64, hi: i64) -> Self {
        Self { name: name.to_string(), labels: (lo..=hi).map(|v| v.to_string()).collect() }
    }

    pub fn radix(&self) -> usize {
        self.labels.len()
    }

    pub fn digit_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Mixed-radix encoding of register tuples, most significant register first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisIndex {
    registers: Vec<Register>,
    size: usize,
}

impl BasisIndex {
    pub fn new(registers: Vec<Register>) -> Result<Self, QqaError> {
        let mut size = 1usize;
        for r in &registers {
            if r.radix() == 0 {
                return Err(QqaError::InvalidBasis(format!("register '{}' has no values", r.name)));
            }
            size = size
                .checked_mul(r.radix())
                .ok_or_else(|| QqaError::InvalidBasis("basis size overflows".to_string()))?;
        }
        Ok(Self { registers, size })
    }

    /// Single register with values `0..n`.
    pub fn flat(name: &str, n: usize) -> Result<Self, QqaError> {
        Self::new(vec![Register { name: name.to_string(), labels: (0..n).map(|i| i.to_string()).collect() }])
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `ceil(log2 size)`, the qubit count of the basis.
    pub fn qubits(&self) -> u32 {
        ceil_log2(self.size)
    }

    pub fn encode(&self, digits: &[usize]) -> Result<usize, QqaError> {
        if digits.len() != self.registers.len() {
            return Err(QqaError::InvalidBasis(format!(
                "expected {} coordinates, found {}",
                self.registers.len(),
                digits.len()
            )));
        }
        let mut index = 0usize;
        for (d, r) in digits.iter().zip(&self.registers) {
            if *d >= r.radix() {
                return Err(QqaError::CoordinateOutOfRange { register: r.name.clone(), value: *d, radix: r.radix() });
            }
            index = index * r.radix() + d;
        }
        Ok(index)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.registers.len()];
        for (slot, r) in digits.iter_mut().zip(&self.registers).rev() {
            *slot = index % r.radix();
            index /= r.radix();
        }
        digits
    }

    /// Encodes a tuple given by labels.
    pub fn encode_labels(&self, labels: &[&str]) -> Result<usize, QqaError> {
        let digits = labels
            .iter()
            .zip(&self.registers)
            .map(|(l, r)| {
                r.digit_of(l).ok_or_else(|| QqaError::InvalidBasis(format!("'{l}' is not a value of register '{}'", r.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.encode(&digits)
    }

    /// Human-readable tuple such as `(q1,0)`.
    pub fn label(&self, index: usize) -> String {
        let parts: Vec<&str> = self
            .decode(index)
            .iter()
            .zip(&self.registers)
            .map(|(&d, r)| r.labels[d].as_str())
            .collect();
        format!("({})", parts.join(","))
    }

    /// Concatenation `self x other`, register names prefixed to stay distinct.
    pub fn product(&self, other: &Self, left: &str, right: &str) -> Result<Self, QqaError> {
        let rename = |prefix: &str, r: &Register| Register { name: format!("{prefix}.{}", r.name), labels: r.labels.clone() };
        let regs = self
            .registers
            .iter()
            .map(|r| rename(left, r))
            .chain(other.registers.iter().map(|r| rename(right, r)))
            .collect();
        Self::new(regs)
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.registers.iter().map(|r| format!("{}[{}]", r.name, r.radix())).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn most_significant_first() {
        let b = BasisIndex::new(vec![Register::labeled("q", &["q0", "q1", "q2"]), Register::range("h", 0, 3)]).unwrap();
        assert_eq!(b.size(), 12);
        assert_eq!(b.encode(&[1, 2]).unwrap(), 6);
        assert_eq!(b.decode(6), vec![1, 2]);
        assert_eq!(b.label(6), "(q1,2)");
        assert_eq!(b.encode_labels(&["q2", "3"]).unwrap(), 11);
    }

    #[test]
    fn out_of_range_coordinate() {
        let b = BasisIndex::flat("x", 3).unwrap();
        assert!(matches!(b.encode(&[3]), Err(QqaError::CoordinateOutOfRange { .. })));
    }

    #[test]
    fn qubit_counts() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(12), 4);
        assert_eq!(ceil_log2(16), 4);
        assert_eq!(ceil_log2(17), 5);
    }
}
