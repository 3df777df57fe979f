#ifndef CMS_ERRORS_HPP
#define CMS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cms {

// Base class for every failure the simulator reports through exceptions.
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

class OutOfRegion : public SimError {
public:
    explicit OutOfRegion(const std::string& what) : SimError(what) {}
};

class ImpossibleSequence : public SimError {
public:
    explicit ImpossibleSequence(const std::string& what) : SimError(what) {}
};

class UnknownDevice : public SimError {
public:
    explicit UnknownDevice(const std::string& what) : SimError(what) {}
};

class NoGateway : public SimError {
public:
    explicit NoGateway(const std::string& what) : SimError(what) {}
};

class SessionExpired : public SimError {
public:
    explicit SessionExpired(const std::string& what) : SimError(what) {}
};

class NoRoute : public SimError {
public:
    explicit NoRoute(const std::string& what) : SimError(what) {}
};

class EmptyInput : public SimError {
public:
    explicit EmptyInput(const std::string& what) : SimError(what) {}
};

class EmptyWorld : public SimError {
public:
    explicit EmptyWorld(const std::string& what) : SimError(what) {}
};

class EmptyScenario : public SimError {
public:
    explicit EmptyScenario(const std::string& what) : SimError(what) {}
};

// Carries the offending config field so the CLI can name it in diagnostics.
class ConfigInvalid : public SimError {
public:
    ConfigInvalid(std::string field, const std::string& what)
        : SimError(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

} // namespace cms

#endif
