#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "jbw/classfile.hpp"

namespace jbw {

// --- variables ---------------------------------------------------------------

enum class VarOrigin : u1 {
  Local,      // original local slot; a = slot index
  Temp,       // transformation temporary; a = pc, b = per-pc counter
  StackSave,  // stack spill for a join point; a = target pc, b = depth
};

struct IrVarInfo {
  VarOrigin origin;
  u4 a = 0;
  u4 b = 0;
  JvmType type = JvmType::Int;
  std::string name;

  friend bool operator==(const IrVarInfo& x, const IrVarInfo& y) {
    return x.origin == y.origin && x.a == y.a && x.b == y.b && x.type == y.type;
  }
};

using VarId = u4;

// --- expressions -------------------------------------------------------------

enum class UnOpKind : u1 { Neg, Conv, ArrayLength, InstanceOf };
enum class BinOpKind : u1 { Add, Sub, Mul, Div, Rem, Shl, Shr, UShr, And, Or, Xor, Cmp };

class Expr;

struct ExprNode {
  enum class Kind : u1 { Const, Var, Unop, Binop } kind;
  JvmType type = JvmType::Int;
  u4 height = 0;

  ConstVal cval;  // Const
  VarId var = 0;  // Var

  UnOpKind un = UnOpKind::Neg;
  JvmBasicType conv_from = JvmBasicType::Int;  // Unop/Conv
  ConvTarget conv_to = ConvTarget::Int;
  std::optional<ObjectType> type_arg;  // InstanceOf

  BinOpKind bin = BinOpKind::Add;  // Binop
  JvmBasicType bin_type = JvmBasicType::Int;
  CmpKind cmp = CmpKind::LCmp;

  std::shared_ptr<const ExprNode> a, b;
};

// Side-effect-free expression tree over constants and variables. Heap reads,
// calls and faults never appear inside; faulting operations sit behind
// explicit check instructions instead.
class Expr {
 public:
  Expr() = default;

  static Expr constant(ConstVal v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Const;
    n->type = v.type();
    n->cval = std::move(v);
    return Expr(std::move(n));
  }
  static Expr var(VarId id, JvmType type) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Var;
    n->type = type;
    n->var = id;
    return Expr(std::move(n));
  }
  static Expr neg(Expr e, JvmBasicType t) {
    auto n = mk_un(UnOpKind::Neg, std::move(e));
    n->type = to_jvm_type(t);
    return Expr(std::move(n));
  }
  static Expr conv(Expr e, JvmBasicType from, ConvTarget to) {
    auto n = mk_un(UnOpKind::Conv, std::move(e));
    n->conv_from = from;
    n->conv_to = to;
    switch (to) {
      case ConvTarget::Long:
        n->type = JvmType::Long;
        break;
      case ConvTarget::Float:
        n->type = JvmType::Float;
        break;
      case ConvTarget::Double:
        n->type = JvmType::Double;
        break;
      default:
        n->type = JvmType::Int;
        break;
    }
    return Expr(std::move(n));
  }
  static Expr array_length(Expr e) {
    auto n = mk_un(UnOpKind::ArrayLength, std::move(e));
    n->type = JvmType::Int;
    return Expr(std::move(n));
  }
  static Expr instance_of(Expr e, ObjectType t) {
    auto n = mk_un(UnOpKind::InstanceOf, std::move(e));
    n->type = JvmType::Int;
    n->type_arg = std::move(t);
    return Expr(std::move(n));
  }
  static Expr binop(BinOpKind op, JvmBasicType t, Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binop;
    n->bin = op;
    n->bin_type = t;
    n->type = to_jvm_type(t);
    n->height = 1 + std::max(a.height(), b.height());
    n->a = a.n_;
    n->b = b.n_;
    return Expr(std::move(n));
  }
  static Expr cmp(CmpKind k, Expr a, Expr b) {
    JvmBasicType t = k == CmpKind::LCmp
                         ? JvmBasicType::Long
                         : (k <= CmpKind::FCmpG ? JvmBasicType::Float : JvmBasicType::Double);
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Binop;
    n->bin = BinOpKind::Cmp;
    n->bin_type = t;
    n->cmp = k;
    n->type = JvmType::Int;
    n->height = 1 + std::max(a.height(), b.height());
    n->a = a.n_;
    n->b = b.n_;
    return Expr(std::move(n));
  }

  bool valid() const { return n_ != nullptr; }
  const ExprNode& node() const { return *n_; }
  JvmType type() const { return n_->type; }
  u4 height() const { return n_->height; }
  Expr child_a() const { return Expr(n_->a); }
  Expr child_b() const { return Expr(n_->b); }

  bool is_var(VarId v) const {
    return n_->kind == ExprNode::Kind::Var && n_->var == v;
  }

  bool mentions(VarId v) const {
    if (n_->kind == ExprNode::Kind::Var) return n_->var == v;
    if (n_->a && Expr(n_->a).mentions(v)) return true;
    if (n_->b && Expr(n_->b).mentions(v)) return true;
    return false;
  }

  template <class F>
  void for_each_var(F&& f) const {
    if (n_->kind == ExprNode::Kind::Var) {
      f(n_->var);
      return;
    }
    if (n_->a) Expr(n_->a).for_each_var(f);
    if (n_->b) Expr(n_->b).for_each_var(f);
  }

  friend bool operator==(const Expr& x, const Expr& y) {
    if (x.n_ == y.n_) return true;
    if (!x.n_ || !y.n_) return false;
    const ExprNode &a = *x.n_, &b = *y.n_;
    if (a.kind != b.kind || a.type != b.type) return false;
    switch (a.kind) {
      case ExprNode::Kind::Const:
        return a.cval == b.cval;
      case ExprNode::Kind::Var:
        return a.var == b.var;
      case ExprNode::Kind::Unop:
        return a.un == b.un && a.conv_from == b.conv_from && a.conv_to == b.conv_to &&
               a.type_arg == b.type_arg && Expr(a.a) == Expr(b.a);
      case ExprNode::Kind::Binop:
        return a.bin == b.bin && a.bin_type == b.bin_type && (a.bin != BinOpKind::Cmp || a.cmp == b.cmp) &&
               Expr(a.a) == Expr(b.a) && Expr(a.b) == Expr(b.b);
    }
    return false;
  }
  friend bool operator!=(const Expr& x, const Expr& y) { return !(x == y); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : n_(std::move(n)) {}
  static std::shared_ptr<ExprNode> mk_un(UnOpKind k, Expr e) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Unop;
    n->un = k;
    n->height = 1 + e.height();
    n->a = e.n_;
    return n;
  }
  std::shared_ptr<const ExprNode> n_;
};

// --- checks ------------------------------------------------------------------

enum class CheckKind : u1 { NotZero, NotNull, Bounds, NotNegative, ArrayStore, CheckCast };

struct Check {
  CheckKind kind;
  Expr a;                              // divisor / reference / array / size / value source
  std::optional<Expr> b;               // index (Bounds) or stored value (ArrayStore)
  std::optional<ObjectType> cast_type;  // CheckCast

  friend bool operator==(const Check& x, const Check& y) {
    return x.kind == y.kind && x.a == y.a && x.b == y.b && x.cast_type == y.cast_type;
  }
};

// Exception the check throws when violated (dotted class name).
inline const char* check_exception_name(CheckKind k) {
  switch (k) {
    case CheckKind::NotZero:
      return "java.lang.ArithmeticException";
    case CheckKind::NotNull:
      return "java.lang.NullPointerException";
    case CheckKind::Bounds:
      return "java.lang.ArrayIndexOutOfBoundsException";
    case CheckKind::NotNegative:
      return "java.lang.NegativeArraySizeException";
    case CheckKind::ArrayStore:
      return "java.lang.ArrayStoreException";
    case CheckKind::CheckCast:
      return "java.lang.ClassCastException";
  }
  return "java.lang.Error";
}

// --- instructions --------------------------------------------------------------

enum class CondOp : u1 { Eq, Ne, Lt, Ge, Gt, Le };

namespace ir {

struct Nop {};
struct Assign {
  VarId dst;
  Expr value;
};
struct FieldWrite {
  Expr target;
  ClassNameId owner;
  FieldSigId sig;
  Expr value;
};
struct StaticWrite {
  ClassNameId owner;
  FieldSigId sig;
  Expr value;
};
struct FieldRead {
  VarId dst;
  Expr target;
  ClassNameId owner;
  FieldSigId sig;
};
struct StaticRead {
  VarId dst;
  ClassNameId owner;
  FieldSigId sig;
};
struct ArrayWrite {
  Expr array;
  Expr index;
  Expr value;
  JvmArrayType type;
};
struct ArrayRead {
  VarId dst;
  Expr array;
  Expr index;
  JvmArrayType type;
};
// Folded allocation + constructor call: the only way a class instance is
// created in the IR.
struct NewObject {
  VarId dst;
  ClassNameId cls;
  MethodSigId ctor;
  std::vector<Expr> args;
};
struct NewArr {
  VarId dst;
  ObjectType array_type;
  std::vector<Expr> dims;
};
struct InvokeIr {
  std::optional<VarId> dst;
  InvokeKind kind;
  std::optional<Expr> receiver;  // absent for static
  ObjectType owner;
  MethodSigId sig;
  std::vector<Expr> args;
};
// Marks where the class's static initializer may run; placed so that
// class-initialization order survives expression reordering.
struct MayInit {
  ClassNameId cls;
};
struct CheckIr {
  Check check;
};
struct GotoIr {
  u4 target;  // IR instruction index
};
struct IfIr {
  CondOp op;
  Expr left, right;
  u4 target;
};
struct SwitchIr {
  Expr selector;
  std::vector<std::pair<i4, u4>> cases;
  u4 default_target;
};
struct ReturnIr {
  std::optional<Expr> value;
};
struct ThrowIr {
  Expr value;
};
struct MonEnter {
  Expr value;
};
struct MonExit {
  Expr value;
};

}  // namespace ir

using IrInstr =
    std::variant<ir::Nop, ir::Assign, ir::FieldWrite, ir::StaticWrite, ir::FieldRead,
                 ir::StaticRead, ir::ArrayWrite, ir::ArrayRead, ir::NewObject, ir::NewArr,
                 ir::InvokeIr, ir::MayInit, ir::CheckIr, ir::GotoIr, ir::IfIr, ir::SwitchIr,
                 ir::ReturnIr, ir::ThrowIr, ir::MonEnter, ir::MonExit>;

template <class T>
const T* ir_as(const IrInstr& i) {
  return std::get_if<T>(&i);
}
template <class T>
bool ir_is(const IrInstr& i) {
  return std::holds_alternative<T>(i);
}

struct IrMethod {
  ClassNameId owner;
  MethodSigId sig;
  u2 access = 0;

  std::vector<IrVarInfo> vars;

  struct Ins {
    u4 pc;  // originating bytecode pc
    IrInstr ins;
  };
  std::vector<Ins> body;

  struct Handler {
    u4 start, end;  // IR index range, end exclusive
    u4 handler;     // IR index
    std::optional<ClassNameId> catch_type;
    VarId exc_var;
  };
  std::vector<Handler> handlers;

  u4 bytecode_instr_count = 0;
  u2 bytecode_locals = 0;
  int passes_used = 0;

  const IrVarInfo& var(VarId id) const { return vars[id]; }
};

// Deterministic variable naming (shared by the transformer and the
// flattener so listings stay stable).
inline std::string var_name(VarOrigin origin, u4 a, u4 b) {
  switch (origin) {
    case VarOrigin::Local:
      return "l" + std::to_string(a);
    case VarOrigin::Temp:
      return "t" + std::to_string(a) + "_" + std::to_string(b);
    case VarOrigin::StackSave:
      return "s" + std::to_string(a) + "_" + std::to_string(b);
  }
  return "?";
}

// Interns (origin, a, b, type) into the method's variable table.
class VarTable {
 public:
  VarId get(IrMethod& m, VarOrigin origin, u4 a, u4 b, JvmType type) {
    auto key = std::tuple<u1, u4, u4, u1>(static_cast<u1>(origin), a, b, static_cast<u1>(type));
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    IrVarInfo info{origin, a, b, type, var_name(origin, a, b)};
    VarId id = static_cast<VarId>(m.vars.size());
    m.vars.push_back(std::move(info));
    index_.emplace(key, id);
    return id;
  }

  // index an existing var table (for passes that extend a built method)
  void seed(const IrMethod& m) {
    for (VarId i = 0; i < m.vars.size(); ++i) {
      const IrVarInfo& v = m.vars[i];
      index_[std::tuple<u1, u4, u4, u1>(static_cast<u1>(v.origin), v.a, v.b,
                                        static_cast<u1>(v.type))] = i;
    }
  }

 private:
  std::map<std::tuple<u1, u4, u4, u1>, VarId> index_;
};

}  // namespace jbw
