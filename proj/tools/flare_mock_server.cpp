// Serves the mock super-resolution and diffusion protocols until killed.
#include "flare/services.hpp"
#include "flare/synth.hpp"
#include "flare/taxonomy.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Mock SR + diffusion HTTP server"};
  std::string host = "127.0.0.1";
  int port = 8000;
  std::string taxonomy_path;
  std::string prompt(flare::PromptTemplate::kDefault);
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--taxonomy", taxonomy_path, "Taxonomy JSON (default taxonomy when omitted)");
  app.add_option("--prompt-template", prompt);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto taxonomy = taxonomy_path.empty() ? flare::ClassTaxonomy::default_taxonomy()
                                                : flare::ClassTaxonomy::load(taxonomy_path);
    flare::MockServiceServer server(taxonomy, prompt);
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    server.listen(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
