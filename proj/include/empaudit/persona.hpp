#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace empaudit::persona {

enum class Category { Age, Gender, Culture };

inline constexpr std::array<Category, 3> kCategories = {
    Category::Age, Category::Gender, Category::Culture};

std::string_view category_name(Category c);
Category category_from_name(std::string_view name);  // throws ArgumentError

// A concrete (non-Base) attribute value of one category.
struct Attribute {
    Category category;
    std::string value;

    friend auto operator<=>(const Attribute&, const Attribute&) = default;
};

// The attribute lists per category. Values never contain the reserved
// word "Base"; absence of an attribute is modelled with std::nullopt on
// the Persona side.
class Taxonomy {
public:
    // The shipped default lists (6 ages, 4 genders, 8 cultures).
    static const Taxonomy& standard();

    // Config file with one [Section] per category, one value per line.
    static Taxonomy load(const std::filesystem::path& path);

    Taxonomy(std::vector<std::string> ages, std::vector<std::string> genders,
             std::vector<std::string> cultures);

    const std::vector<std::string>& values(Category c) const;
    bool contains(Category c, const std::string& value) const;

private:
    std::vector<std::string> ages_;
    std::vector<std::string> genders_;
    std::vector<std::string> cultures_;
};

// One user identity: an attribute (or Base = nullopt) from each category.
struct Persona {
    std::optional<std::string> age;
    std::optional<std::string> gender;
    std::optional<std::string> culture;

    bool is_base() const { return !age && !gender && !culture; }
    int non_base_count() const {
        return (age ? 1 : 0) + (gender ? 1 : 0) + (culture ? 1 : 0);
    }
    const std::optional<std::string>& component(Category c) const;
    std::optional<std::string>& component(Category c);

    // Compact form for artifact files, e.g. "0-17|Base|Confucian".
    std::string key() const;

    friend auto operator<=>(const Persona&, const Persona&) = default;
};

Persona single_attribute_persona(const Attribute& a);

// Full grid: every combination of (value or Base) across the three
// categories. Deterministic order: culture-major, then gender, then age,
// with Base last within each category. 7 x 5 x 9 = 315 for the standard
// taxonomy. Contains the all-Base persona exactly once.
std::vector<Persona> build_grid(const Taxonomy& taxonomy = Taxonomy::standard());

// One persona per non-Base value of `category`, other categories Base.
std::vector<Persona> isolation_set(Category category,
                                   const Taxonomy& taxonomy = Taxonomy::standard());

// All isolation personas of all categories plus the base state.
std::vector<Persona> isolation_personas(const Taxonomy& taxonomy = Taxonomy::standard());

// Identity clause, e.g. "0-17 age category, Protestant Europe culture and
// male gender". Clause order is fixed (age, culture, gender); Base
// components are dropped and the connectors adjusted. Returns nullopt for
// the base state: no identity turn is sent at all.
std::optional<std::string> render(const Persona& p);

}  // namespace empaudit::persona
