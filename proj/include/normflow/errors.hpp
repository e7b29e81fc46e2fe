#ifndef NORMFLOW_ERRORS_HPP
#define NORMFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace normflow
{

// Root of the library's exception hierarchy.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Operands live in different numbers of degrees of freedom.
class dimension_error : public error
{
public:
    using error::error;
};

// A float-mode frequency cannot decide whether an integer vector is resonant.
class ambiguity_error : public error
{
public:
    using error::error;
};

// Argument outside the domain where the operation is defined.
class domain_error : public error
{
public:
    using error::error;
};

// Malformed user input (JSON, config, sequences).
class input_error : public error
{
public:
    using error::error;
};

// An exp-polynomial has no finite limit at +infinity.
class no_limit_error : public error
{
public:
    using error::error;
};

// Term-count cap exceeded.
class capacity_error : public error
{
public:
    using error::error;
};

// A hypothesis or a certified bound failed. Carries a human-readable witness.
class bound_violation : public error
{
public:
    bound_violation(std::string module, std::string operation, std::string witness)
        : error(module + "::" + operation + ": " + witness), m_module(std::move(module)),
          m_operation(std::move(operation)), m_witness(std::move(witness))
    {
    }

    const std::string &module() const noexcept
    {
        return m_module;
    }
    const std::string &operation() const noexcept
    {
        return m_operation;
    }
    const std::string &witness() const noexcept
    {
        return m_witness;
    }

private:
    std::string m_module;
    std::string m_operation;
    std::string m_witness;
};

} // namespace normflow

#endif
