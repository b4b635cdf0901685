// default_schema.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wozsynth/schema_kb.hpp"

namespace wozsynth {

namespace {
// Five MultiWOZ 2.1 evaluation domains. Informable slot inventory per
// domain follows the dataset statistics table: attraction 3, hotel 10,
// restaurant 7, taxi 4, train 6.
constexpr std::string_view kMultiwozSchema = R"json({
  "domains": {
    "attraction": {
      "slots": {
        "attraction-area": {
          "kind": "informable",
          "description": "what is area or place of attraction?"
        },
        "attraction-name": {
          "kind": "informable",
          "description": "what is the name of attraction?"
        },
        "attraction-type": {
          "kind": "informable",
          "description": "what is the type of attraction?"
        },
        "attraction-address": {
          "kind": "requestable",
          "description": "what is the address of attraction?"
        },
        "attraction-phone": {
          "kind": "requestable",
          "description": "what is the phone number of attraction?"
        },
        "attraction-postcode": {
          "kind": "requestable",
          "description": "what is the postcode of attraction?"
        },
        "attraction-entrance fee": {
          "kind": "requestable",
          "description": "how much is the entrance fee of attraction?"
        },
        "attraction-openhours": {
          "kind": "requestable",
          "description": "what are the opening hours of attraction?"
        }
      }
    },
    "hotel": {
      "slots": {
        "hotel-pricerange": {
          "kind": "informable",
          "description": "what is price range or budget of hotel?"
        },
        "hotel-type": {
          "kind": "informable",
          "description": "what is the type of hotel?"
        },
        "hotel-parking": {
          "kind": "informable",
          "description": "does the hotel need to have parking?",
          "value_vocab": [
            "yes",
            "no"
          ]
        },
        "hotel-book stay": {
          "kind": "informable",
          "description": "how many days of stay for the hotel booking?"
        },
        "hotel-book day": {
          "kind": "informable",
          "description": "what is the day of the hotel booking?"
        },
        "hotel-book people": {
          "kind": "informable",
          "description": "how many people for the hotel booking?"
        },
        "hotel-area": {
          "kind": "informable",
          "description": "what is area or place of hotel?"
        },
        "hotel-stars": {
          "kind": "informable",
          "description": "what is the star rating of hotel?"
        },
        "hotel-internet": {
          "kind": "informable",
          "description": "does the hotel need to have internet or wifi?",
          "value_vocab": [
            "yes",
            "no"
          ]
        },
        "hotel-name": {
          "kind": "informable",
          "description": "what is the name of hotel?"
        },
        "hotel-address": {
          "kind": "requestable",
          "description": "what is the address of hotel?"
        },
        "hotel-phone": {
          "kind": "requestable",
          "description": "what is the phone number of hotel?"
        },
        "hotel-postcode": {
          "kind": "requestable",
          "description": "what is the postcode of hotel?"
        },
        "hotel-ref": {
          "kind": "requestable",
          "description": "what is the reference number of the hotel booking?"
        }
      }
    },
    "restaurant": {
      "slots": {
        "restaurant-food": {
          "kind": "informable",
          "description": "what is food type of restaurant?"
        },
        "restaurant-pricerange": {
          "kind": "informable",
          "description": "what is price range or budget of restaurant?"
        },
        "restaurant-area": {
          "kind": "informable",
          "description": "what is area or place of restaurant?"
        },
        "restaurant-name": {
          "kind": "informable",
          "description": "what is the name of restaurant?"
        },
        "restaurant-book time": {
          "kind": "informable",
          "description": "what time is the restaurant booking for?"
        },
        "restaurant-book day": {
          "kind": "informable",
          "description": "what is the day of the restaurant booking?"
        },
        "restaurant-book people": {
          "kind": "informable",
          "description": "how many people for the restaurant booking?"
        },
        "restaurant-address": {
          "kind": "requestable",
          "description": "what is the address of restaurant?"
        },
        "restaurant-phone": {
          "kind": "requestable",
          "description": "what is the phone number of restaurant?"
        },
        "restaurant-postcode": {
          "kind": "requestable",
          "description": "what is the postcode of restaurant?"
        },
        "restaurant-ref": {
          "kind": "requestable",
          "description": "what is the reference number of the restaurant booking?"
        }
      }
    },
    "taxi": {
      "slots": {
        "taxi-leaveat": {
          "kind": "informable",
          "description": "what time should the taxi leave at?"
        },
        "taxi-destination": {
          "kind": "informable",
          "description": "what is the destination of taxi?"
        },
        "taxi-departure": {
          "kind": "informable",
          "description": "what is the departure place of taxi?"
        },
        "taxi-arriveby": {
          "kind": "informable",
          "description": "what time should the taxi arrive by?"
        },
        "taxi-car type": {
          "kind": "requestable",
          "description": "what is the car type of taxi?"
        },
        "taxi-phone": {
          "kind": "requestable",
          "description": "what is the phone number of taxi?"
        }
      }
    },
    "train": {
      "slots": {
        "train-destination": {
          "kind": "informable",
          "description": "what is the destination of train?"
        },
        "train-day": {
          "kind": "informable",
          "description": "what day does the train leave?"
        },
        "train-departure": {
          "kind": "informable",
          "description": "what is the departure station of train?"
        },
        "train-arriveby": {
          "kind": "informable",
          "description": "what time should the train arrive by?"
        },
        "train-book people": {
          "kind": "informable",
          "description": "how many people for the train booking?"
        },
        "train-leaveat": {
          "kind": "informable",
          "description": "what time should the train leave at?"
        },
        "train-trainid": {
          "kind": "requestable",
          "description": "what is the id of train?"
        },
        "train-duration": {
          "kind": "requestable",
          "description": "how long is the train journey?"
        },
        "train-price": {
          "kind": "requestable",
          "description": "what is the ticket price of train?"
        },
        "train-ref": {
          "kind": "requestable",
          "description": "what is the reference number of the train booking?"
        }
      }
    }
  }
}
)json";
}  // namespace

std::string_view default_multiwoz_schema_json() { return kMultiwozSchema; }

const Schema& default_multiwoz_schema() {
  static const Schema schema = parse_schema(kMultiwozSchema);
  return schema;
}

}  // namespace wozsynth
